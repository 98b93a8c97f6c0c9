//! Acceptance suite: one PASS/FAIL line per criterion. All tolerances are pinned
//! here; the run fails if any criterion fails.

mod common;

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use definetti_core::bayes::{log_likelihood, run_tomography, simulate, update, MeasurementRecord, Resampling, SettingCounts, TrajectoryPlan};
use definetti_core::definetti::{moments, rank_test, rho1, rho2, rho_n, swap_operator, DEFAULT_RANK_TOLERANCE};
use definetti_core::discord::{
    entropic_discord, geometric_discord_closed, geometric_discord_variational, residual_search, variational_search,
    zero_discord_residual, MeasurementAxis,
};
use definetti_core::linalg::CMatrix;
use definetti_core::priors::{line_prior, point_mass, uniform_ball};
use definetti_core::sphere::AxisSearch;
use definetti_core::state::{partial_trace, BlochVector, DensityMatrix, Subsystem};
use num_complex::Complex64;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_budget(elapsed: Duration, budget_s: f64) -> bool {
    elapsed.as_secs_f64() < budget_s
}

/// `E[n nᵀ] = (r̄²/3) 𝟙` for the uniform ball, `r̄² = ∫₀¹ r² · 3r² dr` by the midpoint rule.
fn ball_second_moment() -> f64 {
    let n = 100_000;
    let mean_r2: f64 = (0..n).map(|i| 3.0 * ((i as f64 + 0.5) / n as f64).powi(4) / n as f64).sum();
    mean_r2 / 3.0
}

fn closed_vs_variational() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let count = 10f64.powf(rng.random_range(1.0..4.0)).round() as usize;
        let m = moments(&common::random_ensemble(&mut rng, count));
        let closed = geometric_discord_closed(&m).unwrap();
        let var = geometric_discord_variational(&m, &variational_search(512)).unwrap().value;
        worst = worst.max((closed - var).abs());
    }
    let t = start.elapsed();
    check(worst <= 1e-6 && within_budget(t, 10.0), format!("max |closed - variational| = {worst:.2e} (<= 1e-6), {:.2} s (< 10 s)", t.as_secs_f64()))
}

fn uniform_ball_prior() -> Outcome {
    let start = Instant::now();
    let m = moments(&uniform_ball(1_000_000, 2024).unwrap());
    let c = ball_second_moment();
    let x_norm = m.x_norm_sqr().sqrt();
    let mut tau_dev: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            tau_dev = tau_dev.max((m.tau[i][j] - if i == j { c } else { 0.0 }).abs());
        }
    }
    // x = 0, τ = c𝟙 gives ¼(3c² − c²)
    let d_oracle = 0.5 * c * c;
    let d = geometric_discord_closed(&m).unwrap();
    let t = start.elapsed();
    check(
        x_norm <= 5e-3 && tau_dev <= 2e-3 && (d - d_oracle).abs() <= 1e-3 && within_budget(t, 30.0),
        format!("|x| = {x_norm:.2e}, max|tau - c*I| = {tau_dev:.2e} (c = {c:.6}), D = {d:.6} vs {d_oracle:.6}, {:.2} s", t.as_secs_f64()),
    )
}

fn three_point_mass() -> Outcome {
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].map(|v| BlochVector::try_from(v).unwrap());
    let m = moments(&point_mass(axes.to_vec(), vec![1.0 / 3.0; 3]).unwrap());
    let d = geometric_discord_closed(&m).unwrap();
    // ‖x‖² = ‖τ‖² = 1/3 and x xᵀ + τ τᵀ = (J + 𝟙)/9 with top eigenvalue 4/9
    let oracle = 0.25 * (1.0 / 3.0 + 1.0 / 3.0 - 4.0 / 9.0);
    let flag = rank_test(&m, DEFAULT_RANK_TOLERANCE).unwrap().flags_nonzero_discord;
    check((d - oracle).abs() <= 1e-12 && flag, format!("D = {d:.17} vs 1/18, |Δ| = {:.1e} (<= 1e-12), rank flag = {flag}", (d - oracle).abs()))
}

fn line_exception() -> Outcome {
    let mut rng = common::rng(104);
    let (mut worst_d, mut worst_r, mut worst_par): (f64, f64, f64) = (0.0, 0.0, 1.0);
    for _ in 0..20 {
        let dir = common::unit_vector(&mut rng);
        let k = rng.random_range(2..10);
        let offsets: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = moments(&line_prior(dir, &offsets, common::random_weights(&mut rng, k)).unwrap());
        worst_d = worst_d.max(geometric_discord_closed(&m).unwrap().abs());
        let r = zero_discord_residual(&rho2(&m).unwrap(), Subsystem::A, &residual_search(512)).unwrap();
        worst_r = worst_r.max(r.residual);
        let b = r.best_axis.vector();
        worst_par = worst_par.min((b[0] * dir[0] + b[1] * dir[1] + b[2] * dir[2]).abs());
    }
    check(
        worst_d <= 1e-10 && worst_r <= 1e-8 && worst_par >= 1.0 - 1e-6,
        format!("max D = {worst_d:.1e} (<= 1e-10), max residual = {worst_r:.1e} (<= 1e-8), min |best_axis . line| = {worst_par:.12} (>= 1 - 1e-6)"),
    )
}

fn bell_and_classical() -> Outcome {
    let h = 0.5;
    let classical = DensityMatrix::new(CMatrix::from_diagonal(&[h, 0.0, 0.0, h])).unwrap();
    let phi: Vec<Complex64> = [h.sqrt(), 0.0, 0.0, h.sqrt()].iter().map(|&a| Complex64::new(a, 0.0)).collect();
    let bell = DensityMatrix::pure(&phi).unwrap();
    let r_classical = zero_discord_residual(&classical, Subsystem::A, &residual_search(512)).unwrap().residual;
    let r_bell = zero_discord_residual(&bell, Subsystem::A, &residual_search(512)).unwrap().residual;
    let e_bell = entropic_discord(&bell, Subsystem::A, &AxisSearch::default()).unwrap().value;
    // H(ρ_A) = H(½,½), H(ρ) = 0 for a pure state, and every conditional state is pure
    let (entropy_a, entropy_joint, conditional) = (-2.0 * h * h.ln(), 0.0, 0.0);
    let oracle = entropy_a - entropy_joint + conditional;
    check(
        r_classical <= 1e-8 && r_bell > 0.1 && (e_bell - oracle).abs() <= 1e-3,
        format!("classical residual = {r_classical:.1e} (<= 1e-8), Bell residual = {r_bell:.4} (> 0.1), Bell entropic = {e_bell:.6} vs ln 2 (± 1e-3)"),
    )
}

fn swap_and_marginals() -> Outcome {
    let mut rng = common::rng(106);
    let swap = swap_operator();
    let (mut sw, mut marg, mut direct): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let count = rng.random_range(1..20);
        let m = moments(&common::random_ensemble(&mut rng, count));
        let r2 = rho2(&m).unwrap();
        let r1 = rho1(&m).unwrap();
        sw = sw.max(r2.matrix().conjugate_by(&swap).max_abs_diff(r2.matrix()));
        for side in [Subsystem::A, Subsystem::B] {
            marg = marg.max(partial_trace(&r2, side).unwrap().max_abs_diff(&r1));
        }
    }
    for _ in 0..100 {
        let count = rng.random_range(1..500);
        let e = common::random_ensemble(&mut rng, count);
        direct = direct.max(rho_n(&e, 2).unwrap().max_abs_diff(&rho2(&moments(&e)).unwrap()));
    }
    check(
        sw <= 1e-12 && marg <= 1e-12 && direct <= 1e-12,
        format!("SWAP dev = {sw:.1e}, marginal dev = {marg:.1e}, rhoN(2) vs rho2 = {direct:.1e} (all <= 1e-12)"),
    )
}

fn random_record<R: Rng>(rng: &mut R, settings: usize) -> MeasurementRecord {
    MeasurementRecord::new(
        (0..settings)
            .map(|_| {
                let shots = rng.random_range(1..100);
                let axis = MeasurementAxis::new(common::unit_vector(rng)).unwrap();
                SettingCounts::new(axis, shots, rng.random_range(0..=shots)).unwrap()
            })
            .collect(),
    )
}

fn bayesian_consistency() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(107);
    let (mut weight_dev, mut evidence_dev, mut point_dev): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..20 {
        let prior = common::random_ensemble(&mut rng, 500);
        let (d1, d2) = (random_record(&mut rng, 3), random_record(&mut rng, 3));
        let a = update(&prior, &d1, &Resampling::Never).unwrap();
        let b = update(&a.posterior, &d2, &Resampling::Never).unwrap();
        let batch = update(&prior, &d1.concat(&d2), &Resampling::Never).unwrap();
        for (x, y) in b.posterior.weights().iter().zip(batch.posterior.weights()) {
            weight_dev = weight_dev.max((x - y).abs());
        }
        evidence_dev = evidence_dev.max((a.log_evidence + b.log_evidence - batch.log_evidence).abs());

        // exact finite sum Σ wᵢ Lᵢ over three atoms
        let atoms: Vec<BlochVector> = (0..3).map(|_| common::ball_point(&mut rng, 1.0)).collect();
        let w = common::random_weights(&mut rng, 3);
        let got = update(&point_mass(atoms.clone(), w.clone()).unwrap(), &d1, &Resampling::Never).unwrap().log_evidence;
        let exact: f64 = atoms.iter().zip(&w).map(|(p, wi)| wi * log_likelihood(&d1, p).exp()).sum::<f64>().ln();
        point_dev = point_dev.max((got - exact).abs());
    }

    let axes = [MeasurementAxis::X, MeasurementAxis::Y, MeasurementAxis::Z];
    let mut close = 0;
    for seed in 0..100u64 {
        let truth = common::ball_point(&mut rng, 0.9);
        let prior = uniform_ball(200_000, 10_000 + seed).unwrap();
        let record = simulate(&truth, &axes, 10_000, seed);
        let x = moments(&update(&prior, &record, &Resampling::Never).unwrap().posterior).x;
        let t = truth.components();
        let err = ((x[0] - t[0]).powi(2) + (x[1] - t[1]).powi(2) + (x[2] - t[2]).powi(2)).sqrt();
        if err <= 0.05 {
            close += 1;
        }
    }
    let t = start.elapsed();
    check(
        weight_dev <= 1e-12 && evidence_dev <= 1e-10 && point_dev <= 1e-12 && close >= 95 && within_budget(t, 120.0),
        format!(
            "weights {weight_dev:.1e} (<= 1e-12), log evidence {evidence_dev:.1e} (<= 1e-10), point-mass evidence {point_dev:.1e} (<= 1e-12), \
             posterior mean within 0.05 in {close}/100 seeds (>= 95), {:.1} s (< 120 s)",
            t.as_secs_f64()
        ),
    )
}

fn discord_persistence() -> Outcome {
    let start = Instant::now();
    let mut positive_final = 0;
    let mut floor_ok = 0;
    let mut lowest: f64 = f64::INFINITY;
    for seed in 0..50u64 {
        let prior = uniform_ball(100_000, 20_000 + seed).unwrap();
        let plan = TrajectoryPlan {
            schedule: [MeasurementAxis::X, MeasurementAxis::Y, MeasurementAxis::Z].map(|a| (a, 500)).to_vec(),
            steps: 20,
            seed,
            resample_threshold: Some(0.5),
        };
        let run = run_tomography(&prior, &BlochVector::ORIGIN, &plan, 0).unwrap();
        let values: Vec<f64> = run.trajectory.iter().map(|p| p.geom_discord).collect();
        if *values.last().unwrap() > 0.0 {
            positive_final += 1;
        }
        let before_last = values[..20].iter().copied().fold(f64::INFINITY, f64::min);
        lowest = lowest.min(before_last);
        if before_last >= 1e-6 {
            floor_ok += 1;
        }
    }
    let t = start.elapsed();
    check(
        positive_final >= 49 && floor_ok == 50,
        format!(
            "final D > 0 in {positive_final}/50 seeds (>= 49); trajectory >= 1e-6 before step 20 in {floor_ok}/50 seeds (50 required), \
             lowest pre-final value {lowest:.2e}, {:.1} s",
            t.as_secs_f64()
        ),
    )
}

const TOMO_CONFIG: &str = r#"{
  "schema": 1,
  "prior": { "family": "uniform_ball", "count": 50000, "seed": 5 },
  "true_state": [0.2, -0.1, 0.4],
  "schedule": [
    { "axis": [1.0, 0.0, 0.0], "shots": 400 },
    { "axis": [0.0, 1.0, 0.0], "shots": 400 },
    { "axis": [0.0, 0.0, 1.0], "shots": 400 }
  ],
  "steps": 12,
  "seed": 77,
  "resample_threshold": 0.5,
  "discord": { "grid_size": 256, "angle_tol": 1e-4, "entropic": true }
}"#;

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("tomo.json");
    fs::write(&config, TOMO_CONFIG).unwrap();
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("a", vec!["tomo"]),
        ("b", vec!["tomo"]),
        ("t1", vec!["tomo", "--threads", "1"]),
        ("t8", vec!["tomo", "--threads", "8"]),
    ];
    let mut outputs = Vec::new();
    for (name, args) in &runs {
        let out = tmp.path().join(name);
        let status = common::definetti(args, &config, &out);
        if !status.status.success() {
            return check(false, format!("run `{name}` exited with {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr)));
        }
        outputs.push(read_dir_bytes(&out));
    }
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    check(
        identical && names.len() == 4,
        format!("files {names:?}: repeat runs identical = {}, --threads 1 vs 8 identical = {}", outputs[0] == outputs[1], outputs[2] == outputs[3]),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("closed and variational geometric discord agree", closed_vs_variational),
        ("uniform-ball prior moments and discord", uniform_ball_prior),
        ("three-point-mass prior discord is 1/18", three_point_mass),
        ("line priors have zero discord", line_exception),
        ("dephasing residual and entropic discord on Bell/classical states", bell_and_classical),
        ("SWAP and marginal invariants", swap_and_marginals),
        ("Bayesian update consistency and concentration", bayesian_consistency),
        ("posterior discord persistence", discord_persistence),
        ("tomo output determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} {name}: {}", i + 1, outcome.detail);
        if !outcome.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
