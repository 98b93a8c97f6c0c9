//! Quantum discord of two-qubit states.
//!
//! Three routes are provided:
//!
//! * the closed-form geometric measure `D = ¼(‖x‖² + ‖τ‖² − λ_max(x xᵀ + τ τᵀ))`,
//! * the same quantity as a minimization over the first vector `m₁` of an
//!   orthonormal frame, using `m₂m₂ᵀ + m₃m₃ᵀ = 𝟙 − m₁m₁ᵀ`,
//! * the entropic (Ollivier–Zurek) discord, minimized over rank-one projective
//!   measurements on the measured side.
//!
//! [`zero_discord_residual`] measures how far a state is from being invariant
//! under local dephasing in the best basis. Its square equals the geometric
//! measure, which makes it an independent check on the closed form.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::definetti::{rho2, swap_operator, MomentSummary};
use crate::error::{Error, Result};
use crate::linalg::{dot3, mat3_mul, mat3_vec, norm3, outer3, symmetric3_eigs, transpose3, CMatrix, Mat3, Vec3};
use crate::sphere::{self, canonical_axis, AxisSearch};
use crate::state::{partial_trace, pauli_dot, von_neumann_entropy, DensityMatrix, Subsystem, BALL_TOLERANCE};

/// Negative discord values down to this magnitude are rounding noise and clamp to zero.
pub const CLAMP_TOLERANCE: f64 = 1e-9;
/// Negative entropic values down to this magnitude clamp to zero.
pub const ENTROPIC_CLAMP_TOLERANCE: f64 = 1e-6;
/// Branches with probability at or below this are skipped.
pub const ZERO_BRANCH: f64 = 1e-12;
/// Stationarity bound on the projected gradient at the variational optimum (relative to ‖Λ‖).
pub const STATIONARITY_TOLERANCE: f64 = 1e-6;

/// Unit vector `m` labelling the projectors `Π± = ½(𝟙 ± m·σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementAxis(Vec3);

impl MeasurementAxis {
    pub const X: MeasurementAxis = MeasurementAxis([1.0, 0.0, 0.0]);
    pub const Y: MeasurementAxis = MeasurementAxis([0.0, 1.0, 0.0]);
    pub const Z: MeasurementAxis = MeasurementAxis([0.0, 0.0, 1.0]);

    pub fn new(m: Vec3) -> Result<Self> {
        let norm = norm3(&m);
        if !norm.is_finite() || (norm - 1.0).abs() > BALL_TOLERANCE {
            return Err(Error::NotUnitDirection { norm });
        }
        Ok(Self(m))
    }

    /// Normalizes an arbitrary nonzero direction.
    pub fn from_direction(v: Vec3) -> Result<Self> {
        let norm = norm3(&v);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotUnitDirection { norm });
        }
        Ok(Self([v[0] / norm, v[1] / norm, v[2] / norm]))
    }

    pub fn vector(&self) -> Vec3 {
        self.0
    }

    /// `Π₊` or `Π₋` as a 2×2 matrix.
    pub fn projector(&self, outcome: Outcome) -> CMatrix {
        let ms = pauli_dot(&self.0);
        let id = CMatrix::identity(2);
        match outcome {
            Outcome::Plus => (&id + &ms).scale(0.5),
            Outcome::Minus => (&id - &ms).scale(0.5),
        }
    }
}

impl Serialize for MeasurementAxis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MeasurementAxis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = <[f64; 3]>::deserialize(d)?;
        MeasurementAxis::new(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];
}

fn clamp(v: f64, tol: f64) -> f64 {
    if v < 0.0 && v >= -tol {
        0.0
    } else {
        v
    }
}

/// `Λ = x xᵀ + τ τᵀ`.
pub fn lambda_matrix(m: &MomentSummary) -> Mat3 {
    let xx = outer3(&m.x, &m.x);
    let tt = mat3_mul(&m.tau, &transpose3(&m.tau));
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = xx[i][j] + tt[i][j];
        }
    }
    out
}

/// Closed-form geometric discord from the largest eigenvalue of `Λ`.
pub fn geometric_discord_closed(m: &MomentSummary) -> Result<f64> {
    let (eigs, _) = symmetric3_eigs(&lambda_matrix(m))?;
    let d = 0.25 * (m.x_norm_sqr() + m.tau_norm_sqr() - eigs[0]);
    Ok(clamp(d, CLAMP_TOLERANCE))
}

/// Frame objective `¼(xᵀPx + Tr(τPτ))` with `P = 𝟙 − m₁m₁ᵀ`.
pub fn frame_objective(m: &MomentSummary, m1: &Vec3) -> f64 {
    let mx = dot3(m1, &m.x);
    let tm = mat3_vec(&m.tau, m1);
    0.25 * (m.x_norm_sqr() - mx * mx + m.tau_norm_sqr() - dot3(&tm, &tm))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalDiscord {
    pub value: f64,
    pub argmin: MeasurementAxis,
}

/// Search schedule for the frame minimization: the objective is a cheap quadratic form,
/// so refinement runs much further than for the entropic search.
pub fn variational_search(grid_size: usize) -> AxisSearch {
    AxisSearch { grid_size, angle_tol: 1e-10, candidates: 3 }
}

/// Geometric discord by direct minimization of [`frame_objective`] over the unit sphere.
pub fn geometric_discord_variational(m: &MomentSummary, search: &AxisSearch) -> Result<VariationalDiscord> {
    let f = |a: &Vec3| frame_objective(m, a);
    let best = sphere::minimize(&f, search);

    let lambda = lambda_matrix(m);
    let la = mat3_vec(&lambda, &best.axis);
    let q = dot3(&best.axis, &la);
    let g = [la[0] - q * best.axis[0], la[1] - q * best.axis[1], la[2] - q * best.axis[2]];
    let scale = lambda.iter().flatten().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    let gradient = norm3(&g);
    if gradient > STATIONARITY_TOLERANCE * scale {
        return Err(Error::OptimizerStall { gradient });
    }
    Ok(VariationalDiscord {
        value: clamp(best.value, CLAMP_TOLERANCE),
        argmin: MeasurementAxis(best.axis),
    })
}

/// Outcome probability and post-measurement state of B after measuring A.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalState {
    pub p: f64,
    pub state: DensityMatrix,
}

fn branch(rho: &CMatrix, axis: &MeasurementAxis, outcome: Outcome) -> (f64, CMatrix) {
    let lifted = axis.projector(outcome).kron(&CMatrix::identity(2));
    let projected = &lifted * rho;
    let p = projected.trace().re;
    (p, projected)
}

/// `ρ_{B|±} = Tr_A((Π±⊗𝟙)ρ) / Tr((Π±⊗𝟙)ρ)`.
pub fn conditional_state(rho: &DensityMatrix, axis: &MeasurementAxis, outcome: Outcome) -> Result<ConditionalState> {
    if rho.dim() != 4 {
        return Err(Error::DimMismatch { expected: 4, found: rho.dim() });
    }
    let (p, projected) = branch(rho.matrix(), axis, outcome);
    if p <= ZERO_BRANCH {
        return Err(Error::ZeroProbabilityBranch { p });
    }
    // Tr_A(Π ρ) equals Tr_A(Π ρ Π), which is Hermitian; average with the adjoint to drop rounding
    let sym = (&projected + &projected.adjoint()).scale(0.5 / p);
    let reduced = partial_trace(&DensityMatrix::from_matrix_unchecked(sym), Subsystem::B)?;
    Ok(ConditionalState { p: p.clamp(0.0, 1.0), state: reduced })
}

/// Moves the measured side to position A.
fn measured_first(rho: &DensityMatrix, side: Subsystem) -> DensityMatrix {
    match side {
        Subsystem::A => rho.clone(),
        Subsystem::B => DensityMatrix::from_matrix_unchecked(rho.matrix().conjugate_by(&swap_operator())),
    }
}

/// `Σ± p± H(ρ_{B|±})`, skipping branches with vanishing probability.
pub fn measured_conditional_entropy(rho: &DensityMatrix, axis: &MeasurementAxis) -> Result<f64> {
    let mut total = 0.0;
    for outcome in Outcome::BOTH {
        match conditional_state(rho, axis, outcome) {
            Ok(c) => total += c.p * von_neumann_entropy(&c.state)?,
            Err(Error::ZeroProbabilityBranch { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropicDiscord {
    /// Discord in nats.
    pub value: f64,
    pub argmin: MeasurementAxis,
}

/// Ollivier–Zurek discord `D = H(ρ_meas) − H(ρ) + min_m Σ± p± H(ρ_{other|±})`.
///
/// The minimum is taken over rank-one projective measurements only and is a
/// grid-plus-refinement heuristic, not a certified global optimum.
pub fn entropic_discord(rho: &DensityMatrix, measured: Subsystem, search: &AxisSearch) -> Result<EntropicDiscord> {
    if rho.dim() != 4 {
        return Err(Error::DimMismatch { expected: 4, found: rho.dim() });
    }
    let rho = measured_first(rho, measured);
    let h_measured = von_neumann_entropy(&partial_trace(&rho, Subsystem::A)?)?;
    let h_joint = von_neumann_entropy(&rho)?;
    let f = |a: &Vec3| measured_conditional_entropy(&rho, &MeasurementAxis(*a)).unwrap_or(f64::INFINITY);
    let best = sphere::minimize(&f, search);
    let value = h_measured - h_joint + best.value;
    Ok(EntropicDiscord { value: clamp(value, ENTROPIC_CLAMP_TOLERANCE), argmin: MeasurementAxis(best.axis) })
}

/// Entropic discord over an explicit list of axes (no refinement).
pub fn entropic_discord_on_grid(rho: &DensityMatrix, measured: Subsystem, axes: &[Vec3]) -> Result<f64> {
    let rho = measured_first(rho, measured);
    let h_measured = von_neumann_entropy(&partial_trace(&rho, Subsystem::A)?)?;
    let h_joint = von_neumann_entropy(&rho)?;
    let f = |a: &Vec3| measured_conditional_entropy(&rho, &MeasurementAxis(*a)).unwrap_or(f64::INFINITY);
    let (_, v) = sphere::grid_minimum(&f, axes);
    Ok(h_measured - h_joint + v)
}

/// `Σ± (Π±⊗𝟙) ρ (Π±⊗𝟙)`.
pub fn dephase_first(rho: &CMatrix, axis: &MeasurementAxis) -> CMatrix {
    let id = CMatrix::identity(2);
    Outcome::BOTH
        .iter()
        .map(|&o| {
            let lifted = axis.projector(o).kron(&id);
            &(&lifted * rho) * &lifted
        })
        .fold(CMatrix::zeros(4), |a, b| &a + &b)
}

/// Frobenius distance between `ρ` and its dephasing along `axis` on the given side.
pub fn dephasing_distance(rho: &DensityMatrix, side: Subsystem, axis: &MeasurementAxis) -> f64 {
    let r = measured_first(rho, side);
    (&dephase_first(r.matrix(), axis) - r.matrix()).frobenius_norm()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroResidual {
    pub residual: f64,
    pub best_axis: MeasurementAxis,
}

/// Refinement schedule for [`zero_discord_residual`]; the residual is linear in the
/// axis error near a zero-discord basis, so the angular tolerance sits far below the target residual.
pub fn residual_search(grid_size: usize) -> AxisSearch {
    AxisSearch { grid_size, angle_tol: 1e-10, candidates: 3 }
}

/// Minimum over axes of `‖Δ_m(ρ) − ρ‖_F`, where `Δ_m` dephases `side` in the `m` basis.
pub fn zero_discord_residual(rho: &DensityMatrix, side: Subsystem, search: &AxisSearch) -> Result<ZeroResidual> {
    if rho.dim() != 4 {
        return Err(Error::DimMismatch { expected: 4, found: rho.dim() });
    }
    let r = measured_first(rho, side);
    let f = |a: &Vec3| {
        let d = &dephase_first(r.matrix(), &MeasurementAxis(*a)) - r.matrix();
        d.as_slice().iter().map(Complex64::norm_sqr).sum::<f64>()
    };
    let best = sphere::minimize(&f, search);
    Ok(ZeroResidual { residual: best.value.max(0.0).sqrt(), best_axis: MeasurementAxis(best.axis) })
}

/// Knobs for [`discord_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscordOptions {
    pub grid_size: usize,
    /// Refinement tolerance (radians) of the entropic search.
    pub angle_tol: f64,
    pub entropic: bool,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        Self { grid_size: 512, angle_tol: 1e-4, entropic: true }
    }
}

impl DiscordOptions {
    pub fn entropic_search(&self) -> AxisSearch {
        AxisSearch { grid_size: self.grid_size, angle_tol: self.angle_tol, candidates: 3 }
    }
}

/// Label for the measurement family searched by the entropic minimization.
pub const MEASUREMENT_CLASS: &str = "rank-1 projective (grid + refine)";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscordReport {
    pub geometric_closed: f64,
    pub geometric_variational: f64,
    pub entropic: Option<f64>,
    pub argmin_axis: MeasurementAxis,
    pub zero_residual: f64,
    pub grid_size: usize,
    pub measurement_class: &'static str,
}

/// All discord measures of the two-copy state built from `m`, measured on side A.
pub fn discord_report(m: &MomentSummary, opts: &DiscordOptions) -> Result<DiscordReport> {
    let state = rho2(m)?;
    let closed = geometric_discord_closed(m)?;
    let variational = geometric_discord_variational(m, &variational_search(opts.grid_size))?;
    let entropic = if opts.entropic {
        Some(entropic_discord(&state, Subsystem::A, &opts.entropic_search())?.value)
    } else {
        None
    };
    let residual = zero_discord_residual(&state, Subsystem::A, &residual_search(opts.grid_size))?;
    Ok(DiscordReport {
        geometric_closed: closed,
        geometric_variational: variational.value,
        entropic,
        argmin_axis: MeasurementAxis(canonical_axis(variational.argmin.vector())),
        zero_residual: residual.residual,
        grid_size: opts.grid_size,
        measurement_class: MEASUREMENT_CLASS,
    })
}
