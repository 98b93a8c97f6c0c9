use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Bloch vector norm {norm} lies outside the unit ball")]
    BallViolation { norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("empty operand list")]
    EmptyList,

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace {trace} differs from 1")]
    NotUnitTrace { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("POVM effects do not sum to the identity (max deviation {deviation:e})")]
    IncompletePovm { deviation: f64 },

    #[error("eigenvalue iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("particle count must be positive")]
    ZeroCount,

    #[error("weights must be nonnegative and sum to 1 (sum {sum})")]
    WeightSumViolation { sum: f64 },

    #[error("direction norm {norm} is not 1")]
    NotUnitDirection { norm: f64 },

    #[error("all reweighted particles have zero weight")]
    AllZeroWeight,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("moment pair does not define a positive two-copy state (min eigenvalue {min_eigenvalue:e})")]
    MomentInconsistency { min_eigenvalue: f64 },

    #[error("copy count {copies} exceeds the cap of {cap}")]
    DimCap { copies: usize, cap: usize },

    #[error("outcome probability {p:e} is too small to condition on")]
    ZeroProbabilityBranch { p: f64 },

    #[error("axis search stalled: projected gradient {gradient:e}")]
    OptimizerStall { gradient: f64 },

    #[error("observed data has zero likelihood under every prior particle")]
    ZeroEvidence,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
