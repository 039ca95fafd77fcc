use thiserror::Error;

/// Errors raised by the operator, channel and optimization layers.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("invalid subsystem layout: {0}")]
    Layout(String),

    #[error("eigenvalue iteration did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("problem assembly failed: {0}")]
    Assembly(String),

    #[error("problem too large: block of dimension {dim} (realified {realified}) exceeds the limit {limit}")]
    TooLarge { dim: usize, realified: usize, limit: usize },

    #[error("dimension {d} exceeds the default limit {max}; enable allow_large to solve it")]
    DimensionLimit { d: usize, max: usize },

    #[error("solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
