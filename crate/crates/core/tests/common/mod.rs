#![allow(dead_code)]

use definetti_core::linalg::{CMatrix, Mat3, Vec3};
use definetti_core::priors::ParticleEnsemble;
use definetti_core::state::BlochVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rejection-sampled point of the Bloch ball (test-side, independent of the library sampler).
pub fn ball_point<R: Rng>(rng: &mut R) -> BlochVector {
    loop {
        let v: Vec3 = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if v.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            return BlochVector::try_from(v).unwrap();
        }
    }
}

pub fn unit_vector<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = ball_point(rng).components();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 0.1 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Random ensemble with `count` particles and random weights.
pub fn random_ensemble<R: Rng>(rng: &mut R, count: usize) -> ParticleEnsemble {
    let points: Vec<BlochVector> = (0..count).map(|_| ball_point(rng)).collect();
    let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    ParticleEnsemble::from_parts(points, raw.iter().map(|w| w / total).collect(), None).unwrap()
}

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let mut h = CMatrix::zeros(dim);
    for i in 0..dim {
        h[(i, i)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in (i + 1)..dim {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// `exp(iH)` for a random Hermitian `H`.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    random_hermitian(rng, dim)
        .scale(3.0)
        .hermitian_map(|l| Complex64::new(0.0, l).exp())
        .unwrap()
}

/// Random proper rotation from a random axis and angle (Rodrigues).
pub fn random_rotation<R: Rng>(rng: &mut R) -> Mat3 {
    let k = unit_vector(rng);
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (s, c) = theta.sin_cos();
    let mut q = [[0.0; 3]; 3];
    let kx = [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            q[i][j] = c * id + s * kx[i][j] + (1.0 - c) * k[i] * k[j];
        }
    }
    q
}

pub fn rotate_ensemble(e: &ParticleEnsemble, q: &Mat3) -> ParticleEnsemble {
    let points = e
        .points()
        .iter()
        .map(|p| {
            let n = p.components();
            let r = [0, 1, 2].map(|i| q[i][0] * n[0] + q[i][1] * n[1] + q[i][2] * n[2]);
            BlochVector::try_from(r).unwrap()
        })
        .collect();
    ParticleEnsemble::from_parts(points, e.weights().to_vec(), None).unwrap()
}
