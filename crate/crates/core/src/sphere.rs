//! Minimization of a function of a measurement axis over the unit sphere.
//!
//! A Fibonacci lattice gives a near iso-area coarse grid; the best grid points
//! are then polished by a compass search in the local tangent plane with
//! step halving. Unlike a (θ, φ) coordinate descent the tangent-plane moves
//! behave the same at the poles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot3, norm3, Vec3};

const MAX_REFINE_STEPS: usize = 100_000;

/// Grid density and refinement schedule for axis searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AxisSearch {
    /// Number of Fibonacci-lattice axes in the coarse grid.
    pub grid_size: usize,
    /// Refinement stops once the step falls below this many radians.
    pub angle_tol: f64,
    /// How many of the best grid points are refined.
    pub candidates: usize,
}

impl Default for AxisSearch {
    fn default() -> Self {
        Self { grid_size: 512, angle_tol: 1e-4, candidates: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisMinimum {
    pub axis: Vec3,
    pub value: f64,
    /// Best value on the coarse grid alone.
    pub grid_value: f64,
}

/// `n` nearly evenly spread unit vectors (golden-angle spiral).
pub fn fibonacci_axes(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Representative of `{v, −v}` that is lexicographically largest.
pub fn canonical_axis(v: Vec3) -> Vec3 {
    let neg = [-v[0], -v[1], -v[2]];
    if lex_cmp(&v, &neg).is_ge() {
        v
    } else {
        neg
    }
}

fn lex_cmp(a: &Vec3, b: &Vec3) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Ordering used for all reductions: smaller value first, then larger canonical axis.
fn better(a: &(Vec3, f64), b: &(Vec3, f64)) -> std::cmp::Ordering {
    a.1.total_cmp(&b.1)
        .then_with(|| lex_cmp(&canonical_axis(b.0), &canonical_axis(a.0)))
}

/// Evaluates `f` on every axis and returns the minimum under a deterministic tie-break.
pub fn grid_minimum<F>(f: &F, axes: &[Vec3]) -> (Vec3, f64)
where
    F: Fn(&Vec3) -> f64 + Sync,
{
    let values: Vec<(Vec3, f64)> = axes.par_iter().map(|a| (*a, f(a))).collect();
    values.into_iter().min_by(better).expect("nonempty axis grid")
}

fn normalize(v: Vec3) -> Vec3 {
    let n = norm3(&v);
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn tangent_basis(m: &Vec3) -> (Vec3, Vec3) {
    let k = (0..3)
        .min_by(|&i, &j| m[i].abs().total_cmp(&m[j].abs()))
        .expect("three components");
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let t1 = normalize(cross(&e, m));
    let t2 = cross(m, &t1);
    (t1, t2)
}

/// Compass search on the sphere from `start`, halving the step until it drops below `tol`.
pub fn refine<F>(f: &F, start: Vec3, start_value: f64, initial_step: f64, tol: f64) -> (Vec3, f64)
where
    F: Fn(&Vec3) -> f64,
{
    let (mut m, mut value, mut h) = (start, start_value, initial_step);
    let mut steps = 0;
    while h > tol && steps < MAX_REFINE_STEPS {
        steps += 1;
        let (t1, t2) = tangent_basis(&m);
        let (c, s) = (h.cos(), h.sin());
        let moved = [t1, t2, [-t1[0], -t1[1], -t1[2]], [-t2[0], -t2[1], -t2[2]]]
            .iter()
            .map(|d| normalize([c * m[0] + s * d[0], c * m[1] + s * d[1], c * m[2] + s * d[2]]))
            .map(|cand| (cand, f(&cand)))
            .find(|(_, v)| *v < value);
        match moved {
            Some((cand, v)) => {
                m = cand;
                value = v;
            }
            None => h *= 0.5,
        }
    }
    (m, value)
}

/// Grid search followed by refinement of the best few grid points.
pub fn minimize<F>(f: &F, opts: &AxisSearch) -> AxisMinimum
where
    F: Fn(&Vec3) -> f64 + Sync,
{
    let grid = fibonacci_axes(opts.grid_size.max(1));
    let mut scored: Vec<(Vec3, f64)> = grid.par_iter().map(|a| (*a, f(a))).collect();
    scored.sort_by(better);
    let grid_value = scored[0].1;
    let step = (4.0 * std::f64::consts::PI / grid.len() as f64).sqrt();

    let mut starts: Vec<(Vec3, f64)> = Vec::new();
    for cand in &scored {
        if starts.len() == opts.candidates.max(1) {
            break;
        }
        // skip antipodes and near-duplicates of points already chosen
        if starts.iter().all(|s| dot3(&s.0, &cand.0).abs() < (0.5 * step).cos()) {
            starts.push(*cand);
        }
    }
    let (axis, value) = starts
        .par_iter()
        .map(|&(a, v)| refine(f, a, v, step, opts.angle_tol))
        .collect::<Vec<_>>()
        .into_iter()
        .min_by(better)
        .expect("at least one start");
    AxisMinimum { axis: canonical_axis(axis), value, grid_value }
}
