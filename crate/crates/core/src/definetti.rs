//! Exchangeable two-copy and N-copy states from ensemble moments.
//!
//! For a measure `dμ(n)` over the Bloch ball the one- and two-copy reduced
//! states depend only on `x = ∫dμ n` and `τ = ∫dμ n⊗n`:
//!
//! ```text
//! ρ⁽¹⁾ = ½(𝟙 + x·σ)
//! ρ⁽²⁾ = ¼(𝟙⊗𝟙 + x·σ⊗𝟙 + 𝟙⊗x·σ + Σᵢⱼ τᵢⱼ σᵢ⊗σⱼ)
//! ```
//!
//! `rho2` is assembled from those moments while `rho_n` sums particle tensor
//! powers directly, so the two agree at N = 2 only if both are right.

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{dot3, hermitian_eigs, norm3, outer3, CMatrix, Mat3, Vec3};
use crate::priors::ParticleEnsemble;
use crate::state::{bloch_to_density, pauli, pauli_dot, BlochVector, DensityMatrix};

/// Relative singular-value threshold used by [`rank_test`] unless overridden.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-8;
/// Largest copy number accepted by [`rho_n`].
pub const MAX_COPIES: usize = 6;

const MOMENT_CHUNK: usize = 8192;

/// First and second moments of a measure on the Bloch ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub x: Vec3,
    pub tau: Mat3,
}

impl MomentSummary {
    /// Validates symmetry, positivity, `Tr τ ≤ 1` and positivity of the covariance `τ − x xᵀ`.
    pub fn new(x: Vec3, tau: Mat3) -> Result<Self> {
        let asym = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| (tau[i][j] - tau[j][i]).abs())
            .fold(0.0, f64::max);
        if asym > 1e-12 {
            return Err(Error::InvalidArgument(format!("tau is not symmetric (deviation {asym:e})")));
        }
        let trace = tau[0][0] + tau[1][1] + tau[2][2];
        if trace > 1.0 + 1e-10 {
            return Err(Error::InvalidArgument(format!("trace of tau {trace} exceeds 1")));
        }
        let min_tau = min_eigenvalue3(&tau)?;
        if min_tau < -1e-12 {
            return Err(Error::MomentInconsistency { min_eigenvalue: min_tau });
        }
        let xx = outer3(&x, &x);
        let mut cov = tau;
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] -= xx[i][j];
            }
        }
        let min_cov = min_eigenvalue3(&cov)?;
        if min_cov < -1e-10 {
            return Err(Error::MomentInconsistency { min_eigenvalue: min_cov });
        }
        Ok(Self { x, tau })
    }

    /// `‖x‖²`.
    pub fn x_norm_sqr(&self) -> f64 {
        dot3(&self.x, &self.x)
    }

    /// `‖τ‖² = Tr(τᵀτ)`.
    pub fn tau_norm_sqr(&self) -> f64 {
        self.tau.iter().flatten().map(|v| v * v).sum()
    }

    /// Applies a common rotation `Q` to the underlying measure: `x → Qx`, `τ → QτQᵀ`.
    pub fn rotated(&self, q: &Mat3) -> Self {
        use crate::linalg::{mat3_mul, mat3_vec, transpose3};
        Self { x: mat3_vec(q, &self.x), tau: mat3_mul(&mat3_mul(q, &self.tau), &transpose3(q)) }
    }
}

fn min_eigenvalue3(m: &Mat3) -> Result<f64> {
    Ok(*hermitian_eigs(&CMatrix::from_real_rows(m))?.values.last().expect("3 eigenvalues"))
}

#[derive(Serialize, Deserialize)]
struct MomentWire {
    x: [f64; 3],
    tau: [f64; 9],
}

impl Serialize for MomentSummary {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut tau = [0.0; 9];
        for (k, v) in self.tau.iter().flatten().enumerate() {
            tau[k] = *v;
        }
        MomentWire { x: self.x, tau }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MomentSummary {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = MomentWire::deserialize(d)?;
        let t = w.tau;
        let tau = [[t[0], t[1], t[2]], [t[3], t[4], t[5]], [t[6], t[7], t[8]]];
        MomentSummary::new(w.x, tau).map_err(serde::de::Error::custom)
    }
}

/// `x = Σ wᵢ nᵢ` and `τ = Σ wᵢ nᵢ nᵢᵀ`.
///
/// Partial sums run over fixed-size chunks and are combined in chunk order, so
/// the result does not depend on the number of worker threads.
pub fn moments(e: &ParticleEnsemble) -> MomentSummary {
    let partials: Vec<[f64; 9]> = e
        .points()
        .par_chunks(MOMENT_CHUNK)
        .zip(e.weights().par_chunks(MOMENT_CHUNK))
        .map(|(pts, ws)| {
            // x0 x1 x2 t00 t01 t02 t11 t12 t22
            let mut acc = [0.0; 9];
            for (p, &w) in pts.iter().zip(ws) {
                let [a, b, c] = p.components();
                acc[0] += w * a;
                acc[1] += w * b;
                acc[2] += w * c;
                acc[3] += w * a * a;
                acc[4] += w * a * b;
                acc[5] += w * a * c;
                acc[6] += w * b * b;
                acc[7] += w * b * c;
                acc[8] += w * c * c;
            }
            acc
        })
        .collect();
    let mut s = [0.0; 9];
    for p in &partials {
        for k in 0..9 {
            s[k] += p[k];
        }
    }
    MomentSummary {
        x: [s[0], s[1], s[2]],
        tau: [[s[3], s[4], s[5]], [s[4], s[6], s[7]], [s[5], s[7], s[8]]],
    }
}

/// Single-copy marginal `ρ⁽¹⁾ = ½(𝟙 + x·σ)`; also the total-probability state estimate.
pub fn rho1(m: &MomentSummary) -> Result<DensityMatrix> {
    let norm = norm3(&m.x);
    if norm > 1.0 + 1e-10 {
        return Err(Error::BallViolation { norm });
    }
    Ok(bloch_to_density(&BlochVector::from_array_unchecked(m.x)))
}

/// Two-copy exchangeable state assembled from the moments.
pub fn rho2(m: &MomentSummary) -> Result<DensityMatrix> {
    let id = CMatrix::identity(2);
    let xs = pauli_dot(&m.x);
    let s = pauli();
    let mut acc = &(&id.kron(&id) + &xs.kron(&id)) + &id.kron(&xs);
    for i in 0..3 {
        for j in 0..3 {
            if m.tau[i][j] != 0.0 {
                acc = &acc + &s[i].kron(&s[j]).scale(m.tau[i][j]);
            }
        }
    }
    let rho = acc.scale(0.25);
    let min_eigenvalue = *hermitian_eigs(&rho)?.values.last().expect("4 eigenvalues");
    if min_eigenvalue < -1e-9 {
        return Err(Error::MomentInconsistency { min_eigenvalue });
    }
    Ok(DensityMatrix::from_matrix_unchecked(rho))
}

/// `Σᵢ wᵢ ρ(nᵢ)^{⊗copies}` by direct summation over particles.
pub fn rho_n(e: &ParticleEnsemble, copies: usize) -> Result<DensityMatrix> {
    if copies == 0 {
        return Err(Error::InvalidArgument("copy count must be at least 1".into()));
    }
    if copies > MAX_COPIES {
        return Err(Error::DimCap { copies, cap: MAX_COPIES });
    }
    let dim = 1usize << copies;
    let partials: Vec<CMatrix> = e
        .points()
        .par_chunks(MOMENT_CHUNK)
        .zip(e.weights().par_chunks(MOMENT_CHUNK))
        .map(|(pts, ws)| {
            let mut acc = CMatrix::zeros(dim);
            for (p, &w) in pts.iter().zip(ws) {
                if w == 0.0 {
                    continue;
                }
                let single = bloch_to_density(p).into_matrix();
                let mut power = single.clone();
                for _ in 1..copies {
                    power = power.kron(&single);
                }
                acc = &acc + &power.scale(w);
            }
            acc
        })
        .collect();
    let total = partials.iter().fold(CMatrix::zeros(dim), |a, b| &a + b);
    Ok(DensityMatrix::from_matrix_unchecked(total))
}

/// Coefficients of `ρ⁽²⁾` in the operator basis `(𝟙, σ₁, σ₂, σ₃)` on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationMatrix {
    pub r: [[f64; 4]; 4],
}

impl Serialize for CorrelationMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            r: &'a [f64],
        }
        Wire { r: self.r.as_flattened() }.serialize(s)
    }
}

/// `R = ¼ [[1, xᵀ], [x, τ]]`.
pub fn correlation_matrix(m: &MomentSummary) -> CorrelationMatrix {
    let mut r = [[0.0; 4]; 4];
    r[0][0] = 0.25;
    for i in 0..3 {
        r[0][i + 1] = 0.25 * m.x[i];
        r[i + 1][0] = 0.25 * m.x[i];
        for j in 0..3 {
            r[i + 1][j + 1] = 0.25 * m.tau[i][j];
        }
    }
    CorrelationMatrix { r }
}

/// Outcome of the rank-based sufficient condition for nonzero discord.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank_tau: usize,
    pub rank_r: usize,
    /// `true` certifies nonzero discord; `false` is inconclusive.
    pub flags_nonzero_discord: bool,
}

/// Number of singular values above `tol` times the largest one.
pub fn numerical_rank(m: &CMatrix, tol: f64) -> Result<usize> {
    let sv: Vec<f64> = hermitian_eigs(m)?.values.iter().map(|v| v.abs()).collect();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * largest).count())
}

/// Rank of `τ` and of `R`; flags nonzero discord when `rank τ = 3` or `rank R > 2`.
pub fn rank_test(m: &MomentSummary, tol: f64) -> Result<RankReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("rank tolerance must be positive".into()));
    }
    let rank_tau = numerical_rank(&CMatrix::from_real_rows(&m.tau), tol)?;
    let rank_r = numerical_rank(&CMatrix::from_real_rows(&correlation_matrix(m).r), tol)?;
    Ok(RankReport { rank_tau, rank_r, flags_nonzero_discord: rank_tau == 3 || rank_r > 2 })
}

/// Two-qubit SWAP operator.
pub fn swap_operator() -> CMatrix {
    let mut s = CMatrix::zeros(4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        s[(i, j)] = num_complex::Complex64::new(1.0, 0.0);
    }
    s
}
