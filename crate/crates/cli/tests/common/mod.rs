#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use definetti_core::linalg::Vec3;
use definetti_core::priors::ParticleEnsemble;
use definetti_core::state::BlochVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rejection-sampled point of the Bloch ball, independent of the library samplers.
pub fn ball_point<R: Rng>(rng: &mut R, radius: f64) -> BlochVector {
    loop {
        let v: Vec3 = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if v.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            return BlochVector::try_from(v.map(|c| c * radius)).unwrap();
        }
    }
}

pub fn unit_vector<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = ball_point(rng, 1.0).components();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 0.1 {
            return v.map(|c| c / n);
        }
    }
}

pub fn random_weights<R: Rng>(rng: &mut R, count: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

pub fn random_ensemble<R: Rng>(rng: &mut R, count: usize) -> ParticleEnsemble {
    let points = (0..count).map(|_| ball_point(rng, 1.0)).collect();
    let weights = random_weights(rng, count);
    ParticleEnsemble::from_parts(points, weights, None).unwrap()
}

pub fn definetti(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_definetti"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
