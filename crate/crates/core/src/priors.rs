//! Measures over the Bloch ball as weighted particle ensembles.
//!
//! A [`ParticleEnsemble`] is the empirical stand-in for `dμ(n)`: every moment
//! integral becomes a weighted sum and a Bayes update becomes a reweighting.
//! The same type serves as prior and posterior.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{norm3, Vec3};
use crate::rng::{self, domain, SAMPLING_CHUNK};
use crate::state::{BlochVector, BALL_TOLERANCE};

/// Allowed deviation of caller-supplied weights from a unit sum.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    points: Vec<BlochVector>,
    weights: Vec<f64>,
    seed: Option<u64>,
}

impl ParticleEnsemble {
    /// Builds an ensemble from explicit particles; weights must be nonnegative and sum to 1.
    pub fn from_parts(points: Vec<BlochVector>, weights: Vec<f64>, seed: Option<u64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::ZeroCount);
        }
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch { expected: points.len(), found: weights.len() });
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0)
            || (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE
        {
            return Err(Error::WeightSumViolation { sum });
        }
        let weights = weights.iter().map(|w| w / sum).collect();
        Ok(Self { points, weights, seed })
    }

    /// Equal-weight ensemble over the given points.
    pub fn equally_weighted(points: Vec<BlochVector>, seed: Option<u64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::ZeroCount);
        }
        let w = 1.0 / points.len() as f64;
        let weights = vec![w; points.len()];
        Ok(Self { points, weights, seed })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[BlochVector] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BlochVector, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    /// `(Σ wᵢ²)⁻¹`.
    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Weighted mean Bloch vector.
    pub fn mean(&self) -> Vec3 {
        let mut m = [0.0; 3];
        for (p, w) in self.iter() {
            let n = p.components();
            for k in 0..3 {
                m[k] += w * n[k];
            }
        }
        m
    }

    /// Writes `n1,n2,n3,w` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n1,n2,n3,w")?;
        for (p, w) in self.iter() {
            let [a, b, c] = p.components();
            writeln!(out, "{},{},{},{}", fmt17(a), fmt17(b), fmt17(c), fmt17(w))?;
        }
        Ok(())
    }
}

/// Decimal rendering with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize, Deserialize)]
struct EnsembleWire {
    seed: Option<u64>,
    particles: Vec<[f64; 4]>,
}

impl Serialize for ParticleEnsemble {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EnsembleWire {
            seed: self.seed,
            particles: self
                .iter()
                .map(|(p, w)| {
                    let [a, b, c] = p.components();
                    [a, b, c, w]
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ParticleEnsemble {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = EnsembleWire::deserialize(d)?;
        let mut points = Vec::with_capacity(wire.particles.len());
        let mut weights = Vec::with_capacity(wire.particles.len());
        for [a, b, c, w] in wire.particles {
            points.push(BlochVector::new(a, b, c).map_err(D::Error::custom)?);
            weights.push(w);
        }
        ParticleEnsemble::from_parts(points, weights, wire.seed).map_err(D::Error::custom)
    }
}

fn sample_chunked<F>(count: usize, seed: u64, draw: F) -> Vec<BlochVector>
where
    F: Fn(&mut rand_chacha::ChaCha20Rng) -> Vec3 + Sync,
{
    let chunks = count.div_ceil(SAMPLING_CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = rng::stream(seed, domain::PRIOR + c as u64);
            let len = SAMPLING_CHUNK.min(count - c * SAMPLING_CHUNK);
            (0..len)
                .map(|_| BlochVector::from_array_unchecked(draw(&mut rng)))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Volume-uniform prior on the Bloch ball: uniform direction times radius `U^{1/3}`.
pub fn uniform_ball(count: usize, seed: u64) -> Result<ParticleEnsemble> {
    if count == 0 {
        return Err(Error::ZeroCount);
    }
    let points = sample_chunked(count, seed, |rng| {
        let dir: [f64; 3] = UnitSphere.sample(rng);
        let r = libm::cbrt(rng.random::<f64>());
        [r * dir[0], r * dir[1], r * dir[2]]
    });
    ParticleEnsemble::equally_weighted(points, Some(seed))
}

/// Uniform prior over pure states, `|n| = 1`.
pub fn uniform_sphere(count: usize, seed: u64) -> Result<ParticleEnsemble> {
    if count == 0 {
        return Err(Error::ZeroCount);
    }
    let points = sample_chunked(count, seed, |rng| {
        let dir: [f64; 3] = UnitSphere.sample(rng);
        let r = norm3(&dir);
        [dir[0] / r, dir[1] / r, dir[2] / r]
    });
    ParticleEnsemble::equally_weighted(points, Some(seed))
}

/// Finite-support measure `Σ p_α δ(n − e_α)`.
pub fn point_mass(points: Vec<BlochVector>, weights: Vec<f64>) -> Result<ParticleEnsemble> {
    ParticleEnsemble::from_parts(points, weights, None)
}

/// Measure supported on the chord `{ t·m : |t| ≤ 1 }`.
pub fn line_prior(direction: Vec3, offsets: &[f64], weights: Vec<f64>) -> Result<ParticleEnsemble> {
    let norm = norm3(&direction);
    if (norm - 1.0).abs() > BALL_TOLERANCE {
        return Err(Error::NotUnitDirection { norm });
    }
    let points = offsets
        .iter()
        .map(|&t| {
            if t.abs() > 1.0 {
                return Err(Error::BallViolation { norm: t.abs() });
            }
            BlochVector::try_from([t * direction[0], t * direction[1], t * direction[2]])
        })
        .collect::<Result<Vec<_>>>()?;
    ParticleEnsemble::from_parts(points, weights, None)
}

/// Multiplies each weight by a nonnegative factor and renormalizes.
pub fn reweight(e: &ParticleEnsemble, factors: &[f64]) -> Result<ParticleEnsemble> {
    if factors.len() != e.len() {
        return Err(Error::LengthMismatch { expected: e.len(), found: factors.len() });
    }
    if factors.iter().any(|f| !f.is_finite() || *f < 0.0) {
        return Err(Error::InvalidArgument("reweight factors must be finite and nonnegative".into()));
    }
    let raw: Vec<f64> = e.weights.iter().zip(factors).map(|(w, f)| w * f).collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::AllZeroWeight);
    }
    Ok(ParticleEnsemble {
        points: e.points.clone(),
        weights: raw.into_iter().map(|w| w / total).collect(),
        seed: e.seed,
    })
}
