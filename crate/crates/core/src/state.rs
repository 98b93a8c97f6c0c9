//! Qubit state primitives: Bloch vectors, density matrices, POVMs and the
//! exact small-dimension operations on them (tensor products, partial traces,
//! von Neumann entropy, Born-rule probabilities).

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{dot3, hermitian_eigs, norm3, CMatrix, Vec3};

/// Slack allowed on `|n| ≤ 1`.
pub const BALL_TOLERANCE: f64 = 1e-12;
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-10;
/// Eigenvalues in `[-PSD_TOLERANCE, 0)` are treated as rounding noise and clamped to zero.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Eigenvalues at or below this contribute nothing to the entropy (`0 ln 0 = 0`).
pub const ENTROPY_CUTOFF: f64 = 1e-14;

const I: Complex64 = Complex64::new(0.0, 1.0);
const R1: Complex64 = Complex64::new(1.0, 0.0);
const R0: Complex64 = Complex64::new(0.0, 0.0);

/// The Pauli matrices σ₁, σ₂, σ₃.
pub fn pauli() -> [CMatrix; 3] {
    [
        CMatrix::from_vec(vec![R0, R1, R1, R0]),
        CMatrix::from_vec(vec![R0, -I, I, R0]),
        CMatrix::from_vec(vec![R1, R0, R0, -R1]),
    ]
}

/// `n·σ` as a 2×2 matrix.
pub fn pauli_dot(n: &Vec3) -> CMatrix {
    CMatrix::from_vec(vec![
        Complex64::new(n[2], 0.0),
        Complex64::new(n[0], -n[1]),
        Complex64::new(n[0], n[1]),
        Complex64::new(-n[2], 0.0),
    ])
}

/// Point of the Bloch ball, `|n| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector([0.0; 3]);

    pub fn new(n1: f64, n2: f64, n3: f64) -> Result<Self> {
        Self::try_from([n1, n2, n3])
    }

    pub fn components(&self) -> Vec3 {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm3(&self.0)
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        dot3(&self.0, other)
    }

    /// Constructs without the ball check; callers guarantee membership.
    pub(crate) fn from_array_unchecked(n: Vec3) -> Self {
        Self(n)
    }
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = Error;

    fn try_from(n: [f64; 3]) -> Result<Self> {
        let norm = norm3(&n);
        if !norm.is_finite() || norm > 1.0 + BALL_TOLERANCE {
            return Err(Error::BallViolation { norm });
        }
        Ok(Self(n))
    }
}

impl Serialize for BlochVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlochVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = <[f64; 3]>::deserialize(d)?;
        BlochVector::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: CMatrix) -> Result<Self> {
        let deviation = m.hermitian_deviation();
        if deviation > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > TRACE_TOLERANCE || trace.im.abs() > TRACE_TOLERANCE {
            return Err(Error::NotUnitTrace { trace: trace.re });
        }
        let min_eigenvalue = *hermitian_eigs(&m)?.values.last().expect("nonempty spectrum");
        if min_eigenvalue < -PSD_TOLERANCE {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    /// Pure state `|ψ⟩⟨ψ|` (normalized internally).
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let psi: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self(CMatrix::outer(&psi)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Spectrum in descending order with rounding-level negatives clamped to zero.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigs(&self.0)?
            .values
            .into_iter()
            .map(|v| if (-PSD_TOLERANCE..0.0).contains(&v) { 0.0 } else { v })
            .collect())
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.0.max_abs_diff(&other.0)
    }
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixWire {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityMatrixWire {
            dim: self.dim(),
            re: self.0.as_slice().iter().map(|z| z.re).collect(),
            im: self.0.as_slice().iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = DensityMatrixWire::deserialize(d)?;
        let len = wire.dim * wire.dim;
        if wire.re.len() != len || wire.im.len() != len {
            return Err(D::Error::custom(format!(
                "expected {len} entries for dim {}, got re={} im={}",
                wire.dim,
                wire.re.len(),
                wire.im.len()
            )));
        }
        let data = wire.re.iter().zip(&wire.im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        DensityMatrix::new(CMatrix::from_vec(data)).map_err(D::Error::custom)
    }
}

/// Positive operator-valued measure.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        let first = effects.first().ok_or(Error::EmptyList)?;
        let dim = first.dim();
        let mut total = CMatrix::zeros(dim);
        for e in &effects {
            if e.dim() != dim {
                return Err(Error::DimMismatch { expected: dim, found: e.dim() });
            }
            let min_eigenvalue = *hermitian_eigs(e)?.values.last().expect("nonempty spectrum");
            if min_eigenvalue < -PSD_TOLERANCE {
                return Err(Error::NotPositive { min_eigenvalue });
            }
            total = &total + e;
        }
        let deviation = total.max_abs_diff(&CMatrix::identity(dim));
        if deviation > TRACE_TOLERANCE {
            return Err(Error::IncompletePovm { deviation });
        }
        Ok(Self { effects })
    }

    /// Two-outcome projective measurement `Π± = ½(𝟙 ± m·σ)` along a unit axis.
    pub fn axis(m: &Vec3) -> Result<Self> {
        let norm = norm3(m);
        if (norm - 1.0).abs() > BALL_TOLERANCE {
            return Err(Error::NotUnitDirection { norm });
        }
        let id = CMatrix::identity(2);
        let ms = pauli_dot(m);
        Ok(Self { effects: vec![(&id + &ms).scale(0.5), (&id - &ms).scale(0.5)] })
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }
}

/// One side of a bipartite two-qubit system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

impl Subsystem {
    pub fn other(self) -> Self {
        match self {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        }
    }
}

/// `ρ(n) = ½(𝟙 + n·σ)`.
pub fn bloch_to_density(n: &BlochVector) -> DensityMatrix {
    let m = &CMatrix::identity(2) + &pauli_dot(&n.0);
    DensityMatrix(m.scale(0.5))
}

/// Inverse of [`bloch_to_density`]: `nᵢ = Tr(ρ σᵢ)`.
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimMismatch { expected: 2, found: rho.dim() });
    }
    let m = &rho.0;
    let n = [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re];
    BlochVector::try_from(n)
}

/// Kronecker product `ρ₁ ⊗ ρ₂ ⊗ …`, first factor most significant.
pub fn tensor(parts: &[DensityMatrix]) -> Result<DensityMatrix> {
    let (first, rest) = parts.split_first().ok_or(Error::EmptyList)?;
    let m = rest.iter().fold(first.0.clone(), |acc, p| acc.kron(&p.0));
    Ok(DensityMatrix(m))
}

/// Reduced state of one qubit of a two-qubit state, tracing out the other.
pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimMismatch { expected: 4, found: rho.dim() });
    }
    qubit_marginal(rho, match keep {
        Subsystem::A => 0,
        Subsystem::B => 1,
    })
}

/// Reduced state of qubit `keep` (0 = most significant) of an n-qubit register.
pub fn qubit_marginal(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    let dim = rho.dim();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::InvalidArgument(format!("dimension {dim} is not a qubit register")));
    }
    let qubits = dim.trailing_zeros() as usize;
    if keep >= qubits {
        return Err(Error::InvalidArgument(format!("qubit {keep} out of range for {qubits} qubits")));
    }
    let shift = qubits - 1 - keep;
    let m = &rho.0;
    let mut out = CMatrix::zeros(2);
    for i in 0..dim {
        let bi = (i >> shift) & 1;
        for bj in 0..2 {
            let j = (i & !(1 << shift)) | (bj << shift);
            out[(bi, bj)] += m[(i, j)];
        }
    }
    Ok(DensityMatrix(out))
}

/// `H(ρ) = −Tr(ρ ln ρ)` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let h = rho
        .eigenvalues()?
        .into_iter()
        .filter(|&p| p > ENTROPY_CUTOFF)
        .map(|p| -p * p.ln())
        .sum::<f64>();
    Ok(h.max(0.0))
}

/// Born rule `p_α = Tr(Π_α ρ)`.
pub fn born_probabilities(rho: &DensityMatrix, povm: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimMismatch { expected: povm.dim(), found: rho.dim() });
    }
    Ok(povm.effects.iter().map(|e| (e * &rho.0).trace().re).collect())
}

/// Binary entropy of the pair `(p, 1-p)` in nats.
pub fn binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p].iter().filter(|&&q| q > ENTROPY_CUTOFF).map(|&q| -q * q.ln()).sum()
}
