mod common;

use definetti_core::definetti::{moments, rank_test, rho1, rho2, rho_n, swap_operator, DEFAULT_RANK_TOLERANCE};
use definetti_core::state::{partial_trace, qubit_marginal, Subsystem};
use rand::Rng;

#[test]
fn swap_invariance_and_marginals_over_random_moments() {
    let mut rng = common::rng(10);
    let swap = swap_operator();
    for _ in 0..1000 {
        let count = rng.random_range(1..12);
        let m = moments(&common::random_ensemble(&mut rng, count));
        let r2 = rho2(&m).unwrap();
        assert!(r2.matrix().conjugate_by(&swap).max_abs_diff(r2.matrix()) <= 1e-12);
        let r1 = rho1(&m).unwrap();
        for side in [Subsystem::A, Subsystem::B] {
            assert!(partial_trace(&r2, side).unwrap().max_abs_diff(&r1) <= 1e-12);
        }
    }
}

#[test]
fn rho2_is_positive_for_random_ensembles() {
    let mut rng = common::rng(11);
    for _ in 0..1000 {
        let count = rng.random_range(1..30);
        let m = moments(&common::random_ensemble(&mut rng, count));
        let eig = rho2(&m).unwrap().eigenvalues().unwrap();
        assert!(*eig.last().unwrap() >= -1e-12, "{eig:?}");
        assert!((eig.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn direct_particle_sum_matches_moment_assembly() {
    let mut rng = common::rng(12);
    for _ in 0..100 {
        let count = rng.random_range(1..200);
        let e = common::random_ensemble(&mut rng, count);
        let direct = rho_n(&e, 2).unwrap();
        let assembled = rho2(&moments(&e)).unwrap();
        assert!(direct.max_abs_diff(&assembled) <= 1e-12);
    }
}

#[test]
fn rho_n_marginals_and_exchangeability() {
    let mut rng = common::rng(13);
    for copies in 1..=5 {
        let e = common::random_ensemble(&mut rng, 40);
        let state = rho_n(&e, copies).unwrap();
        let r1 = rho1(&moments(&e)).unwrap();
        for k in 0..copies {
            assert!(qubit_marginal(&state, k).unwrap().max_abs_diff(&r1) <= 1e-10);
        }
        assert!((state.matrix().trace().re - 1.0).abs() < 1e-12);
        // adjacent-pair SWAPs
        let dim = 1usize << copies;
        for pair in 0..copies.saturating_sub(1) {
            let s0 = copies - 1 - pair;
            let s1 = s0 - 1;
            let mut max: f64 = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    let sw = |k: usize| {
                        let (b0, b1) = ((k >> s0) & 1, (k >> s1) & 1);
                        (k & !(1 << s0) & !(1 << s1)) | (b1 << s0) | (b0 << s1)
                    };
                    max = max.max((state.matrix()[(sw(i), sw(j))] - state.matrix()[(i, j)]).norm());
                }
            }
            assert!(max <= 1e-12, "swap ({pair}, {}) deviation {max}", pair + 1);
        }
    }
    let e = common::random_ensemble(&mut rng, 3);
    let six = rho_n(&e, 6).unwrap();
    assert_eq!(six.dim(), 64);
    let eig = six.eigenvalues().unwrap();
    assert!(*eig.last().unwrap() >= -1e-10);
}

#[test]
fn rank_flag_is_monotone_under_tighter_tolerance() {
    let mut rng = common::rng(14);
    for _ in 0..200 {
        let count = rng.random_range(1..6);
        let m = moments(&common::random_ensemble(&mut rng, count));
        let loose = rank_test(&m, 1e-6).unwrap();
        let tight = rank_test(&m, 1e-7).unwrap();
        if loose.flags_nonzero_discord {
            assert!(tight.flags_nonzero_discord);
        }
        assert!(tight.rank_tau >= loose.rank_tau && tight.rank_r >= loose.rank_r);
    }
}

#[test]
fn three_or_more_generic_points_flag_nonzero_discord() {
    let mut rng = common::rng(15);
    for _ in 0..100 {
        let m = moments(&common::random_ensemble(&mut rng, 3));
        let r = rank_test(&m, DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(r.rank_tau, 3);
        assert!(r.flags_nonzero_discord);
    }
}
