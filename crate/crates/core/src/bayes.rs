//! Simulated single-copy tomography and Bayesian updating of particle ensembles.
//!
//! Outcomes of repeated two-outcome projective measurements are batched per
//! setting into `(shots, plus)` counts; the likelihood factorizes exactly over
//! shots, so batching changes nothing. Weights live in the log domain during an
//! update and are normalized with a max shift, since a few thousand shots are
//! enough to underflow linear-domain likelihoods.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::definetti::{moments, rho_n};
use crate::discord::{geometric_discord_closed, MeasurementAxis};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::priors::{fmt17, ParticleEnsemble};
use crate::rng::{self, domain};
use crate::state::{BlochVector, DensityMatrix};

/// Resample once the effective sample size drops below this fraction of the particle count.
pub const DEFAULT_RESAMPLE_THRESHOLD: f64 = 0.5;

/// Counts observed for one measurement setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SettingWire")]
pub struct SettingCounts {
    pub axis: MeasurementAxis,
    pub shots: u64,
    pub plus: u64,
}

#[derive(Deserialize)]
struct SettingWire {
    axis: MeasurementAxis,
    shots: u64,
    plus: u64,
}

impl TryFrom<SettingWire> for SettingCounts {
    type Error = Error;
    fn try_from(w: SettingWire) -> Result<Self> {
        SettingCounts::new(w.axis, w.shots, w.plus)
    }
}

impl SettingCounts {
    pub fn new(axis: MeasurementAxis, shots: u64, plus: u64) -> Result<Self> {
        if plus > shots {
            return Err(Error::InvalidArgument(format!("{plus} '+' outcomes out of {shots} shots")));
        }
        Ok(Self { axis, shots, plus })
    }

    pub fn minus(&self) -> u64 {
        self.shots - self.plus
    }
}

/// Ordered outcome counts of a tomography run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub settings: Vec<SettingCounts>,
}

impl MeasurementRecord {
    pub fn new(settings: Vec<SettingCounts>) -> Self {
        Self { settings }
    }

    /// Total number of single-copy measurements `M`.
    pub fn total_shots(&self) -> u64 {
        self.settings.iter().map(|s| s.shots).sum()
    }

    pub fn extend(&mut self, other: &MeasurementRecord) {
        self.settings.extend_from_slice(&other.settings);
    }

    pub fn concat(&self, other: &MeasurementRecord) -> MeasurementRecord {
        let mut out = self.clone();
        out.extend(other);
        out
    }
}

/// `p(+ | n) = (1 + n·m) / 2`, clamped to `[0, 1]`.
pub fn plus_probability(n: &BlochVector, axis: &MeasurementAxis) -> f64 {
    (0.5 * (1.0 + n.dot(&axis.vector()))).clamp(0.0, 1.0)
}

fn simulate_with<R: Rng>(true_n: &BlochVector, axes: &[MeasurementAxis], shots: u64, rng: &mut R) -> MeasurementRecord {
    let settings = axes
        .iter()
        .map(|axis| {
            let p = plus_probability(true_n, axis);
            let plus = Binomial::new(shots, p).expect("probability in [0, 1]").sample(rng);
            SettingCounts { axis: *axis, shots, plus }
        })
        .collect();
    MeasurementRecord { settings }
}

/// Draws binomial outcome counts for each axis from the Born rule on `true_n`.
pub fn simulate(true_n: &BlochVector, axes: &[MeasurementAxis], shots: u64, seed: u64) -> MeasurementRecord {
    simulate_with(true_n, axes, shots, &mut rng::stream(seed, domain::MEASUREMENT))
}

/// Log-likelihood of the record at `n`; `-∞` when an observed outcome is impossible.
pub fn log_likelihood(record: &MeasurementRecord, n: &BlochVector) -> f64 {
    let mut ll = 0.0;
    for s in &record.settings {
        let p = plus_probability(n, &s.axis);
        for (count, q) in [(s.plus, p), (s.minus(), 1.0 - p)] {
            if count == 0 {
                continue;
            }
            if q <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ll += count as f64 * q.ln();
        }
    }
    ll
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resampling {
    Never,
    /// Systematic resampling when `ESS < threshold · count`.
    Systematic { threshold: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Update {
    pub posterior: ParticleEnsemble,
    /// Natural log of the evidence `Σᵢ wᵢ L(nᵢ)`.
    pub log_evidence: f64,
    /// Effective sample size of the reweighted ensemble, before any resampling.
    pub ess: f64,
    pub resampled: bool,
}

/// Bayes update of `prior` on `record`.
pub fn update(prior: &ParticleEnsemble, record: &MeasurementRecord, resampling: &Resampling) -> Result<Update> {
    if record.total_shots() == 0 {
        return Ok(Update {
            posterior: prior.clone(),
            log_evidence: 0.0,
            ess: prior.effective_sample_size(),
            resampled: false,
        });
    }
    let log_weights: Vec<f64> = prior
        .points()
        .par_iter()
        .zip(prior.weights().par_iter())
        .map(|(p, &w)| if w > 0.0 { w.ln() + log_likelihood(record, p) } else { f64::NEG_INFINITY })
        .collect();
    let shift = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Err(Error::ZeroEvidence);
    }
    let scaled: Vec<f64> = log_weights.iter().map(|lw| (lw - shift).exp()).collect();
    let total: f64 = scaled.iter().sum();
    let log_evidence = shift + total.ln();
    let weights: Vec<f64> = scaled.iter().map(|s| s / total).collect();
    let posterior = ParticleEnsemble::from_parts(prior.points().to_vec(), weights, prior.seed())?;
    let ess = posterior.effective_sample_size();

    let (posterior, resampled) = match *resampling {
        Resampling::Systematic { threshold, seed } if ess < threshold * posterior.len() as f64 => {
            (systematic_resample(&posterior, seed), true)
        }
        _ => (posterior, false),
    };
    Ok(Update { posterior, log_evidence, ess, resampled })
}

/// Systematic resampling to an equally weighted ensemble of the same size.
pub fn systematic_resample(e: &ParticleEnsemble, seed: u64) -> ParticleEnsemble {
    let n = e.len();
    let mut rng = rng::stream(seed, domain::RESAMPLE);
    let step = 1.0 / n as f64;
    let mut u = rng.random::<f64>() * step;
    let mut cumulative = 0.0;
    let mut idx = 0;
    let mut points = Vec::with_capacity(n);
    let weights = e.weights();
    for _ in 0..n {
        while idx + 1 < n && cumulative + weights[idx] < u {
            cumulative += weights[idx];
            idx += 1;
        }
        points.push(e.points()[idx]);
        u += step;
    }
    ParticleEnsemble::equally_weighted(points, e.seed()).expect("nonempty ensemble")
}

/// `∫ dP(n | data) ρ(n)^{⊗copies}` on the posterior ensemble.
pub fn posterior_state(posterior: &ParticleEnsemble, copies: usize) -> Result<DensityMatrix> {
    rho_n(posterior, copies)
}

/// One row of a discord trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub step: usize,
    /// Cumulative number of measured copies.
    pub m: u64,
    /// Cumulative log evidence of all data so far.
    pub log_evidence: f64,
    pub ess: f64,
    pub x: Vec3,
    pub geom_discord: f64,
}

/// Settings for a sequential tomography run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPlan {
    /// `(axis, shots)` settings measured in turn, one per step, cycling.
    pub schedule: Vec<(MeasurementAxis, u64)>,
    pub steps: usize,
    pub seed: u64,
    /// `None` disables resampling.
    pub resample_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyRun {
    pub true_state: BlochVector,
    pub prior: ParticleEnsemble,
    pub record: MeasurementRecord,
    pub posterior: ParticleEnsemble,
    pub trajectory: Vec<TrajectoryPoint>,
    /// Number of copies measured so far plus those left unmeasured.
    pub ensemble_size: u64,
}

fn trajectory_point(step: usize, m: u64, log_evidence: f64, ess: f64, e: &ParticleEnsemble) -> Result<TrajectoryPoint> {
    let mom = moments(e);
    Ok(TrajectoryPoint { step, m, log_evidence, ess, x: mom.x, geom_discord: geometric_discord_closed(&mom)? })
}

/// Sequential measure-and-update loop recording the geometric discord of the
/// posterior two-copy state after every step (step 0 is the prior).
pub fn run_tomography(prior: &ParticleEnsemble, true_n: &BlochVector, plan: &TrajectoryPlan, remaining_copies: u64) -> Result<TomographyRun> {
    if plan.steps == 0 {
        return Err(Error::InvalidArgument("at least one step is required".into()));
    }
    if plan.schedule.is_empty() {
        return Err(Error::EmptyList);
    }
    let mut rng = rng::stream(plan.seed, domain::MEASUREMENT);
    let mut record = MeasurementRecord::default();
    let mut current = prior.clone();
    let mut log_evidence = 0.0;
    let mut trajectory = vec![trajectory_point(0, 0, 0.0, prior.effective_sample_size(), prior)?];

    for step in 1..=plan.steps {
        let (axis, shots) = plan.schedule[(step - 1) % plan.schedule.len()];
        let data = simulate_with(true_n, &[axis], shots, &mut rng);
        let resampling = match plan.resample_threshold {
            Some(threshold) => Resampling::Systematic {
                threshold,
                seed: plan.seed.wrapping_add(step as u64).rotate_left(17) ^ plan.seed,
            },
            None => Resampling::Never,
        };
        let up = update(&current, &data, &resampling)?;
        log_evidence += up.log_evidence;
        record.extend(&data);
        current = up.posterior;
        trajectory.push(trajectory_point(step, record.total_shots(), log_evidence, up.ess, &current)?);
    }

    let ensemble_size = record.total_shots() + remaining_copies;
    Ok(TomographyRun {
        true_state: *true_n,
        prior: prior.clone(),
        record,
        posterior: current,
        trajectory,
        ensemble_size,
    })
}

/// Geometric discord of the posterior two-copy state after each step.
pub fn discord_trajectory(prior: &ParticleEnsemble, true_n: &BlochVector, plan: &TrajectoryPlan) -> Result<Vec<(u64, f64)>> {
    Ok(run_tomography(prior, true_n, plan, 0)?
        .trajectory
        .iter()
        .map(|p| (p.m, p.geom_discord))
        .collect())
}

pub const TRAJECTORY_HEADER: &str = "step,M,log_evidence,ess,x1,x2,x3,geom_discord";

pub fn write_trajectory_csv<W: Write>(points: &[TrajectoryPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.step,
            p.m,
            fmt17(p.log_evidence),
            fmt17(p.ess),
            fmt17(p.x[0]),
            fmt17(p.x[1]),
            fmt17(p.x[2]),
            fmt17(p.geom_discord)
        )?;
    }
    Ok(())
}
