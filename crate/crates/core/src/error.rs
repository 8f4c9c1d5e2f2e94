use thiserror::Error;

/// Errors shared across the crate. Variants that report a defect carry its
/// measured magnitude so callers can see how far an invariant was missed.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("entry buffer of length {len} is not a square matrix")]
    NotSquare { len: usize },

    #[error("matrix side {side} does not match product of subsystem dims {dims_product}")]
    DimsProductMismatch { side: usize, dims_product: usize },

    #[error("subsystem dims must all be >= 1")]
    ZeroDim,

    #[error("operator dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("subsystem index {index} out of range for {count} subsystems")]
    InvalidSubsystem { index: usize, count: usize },

    #[error("the set of kept subsystems is empty")]
    EmptyKeepSet,

    #[error("the set of measured parties is empty")]
    EmptyMeasuredSet,

    #[error("state must have at least 2 parties, got {got}")]
    TooFewParties { got: usize },

    #[error("NonHermitian: hermiticity defect {defect:.3e} exceeds tolerance")]
    NonHermitian { defect: f64 },

    #[error("TraceNotOne: trace defect {defect:.3e} exceeds tolerance")]
    TraceNotOne { defect: f64 },

    #[error("NotPositive: minimum eigenvalue {min_eigenvalue:.3e} below tolerance")]
    NotPositive { min_eigenvalue: f64 },

    #[error("state vector norm defect {defect:.3e} exceeds tolerance")]
    NormDefect { defect: f64 },

    #[error("basis Gram defect {defect:.3e} exceeds tolerance")]
    GramDefect { defect: f64 },

    #[error("expected {expected} elements, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid probability distribution: {detail}")]
    InvalidDistribution { detail: String },

    #[error("parameter {name} = {value} outside its valid range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("VanishingPostselection: postselection probability {probability:.3e} too small")]
    VanishingPostselection { probability: f64 },

    #[error("GridTooCoarse: pointer discretization defect estimate {defect:.3e} exceeds 1e-6")]
    GridTooCoarse { defect: f64 },

    #[error("invalid configuration: {detail}")]
    InvalidConfig { detail: &'static str },

    #[error("Kraus operators not trace preserving: defect {defect:.3e}")]
    NotTracePreserving { defect: f64 },

    #[error("operation requires a two-qubit (2x2) state")]
    NotTwoQubits,

    #[error("operation requires a bipartite state, got {got} parties")]
    NotBipartite { got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
