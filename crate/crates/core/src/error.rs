use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0}: the Clifford module needs an even dimension in 2..=8")]
    UnsupportedDimension(usize),

    #[error("invalid multi-index {0:?}: entries must be strictly increasing and lie in 1..={1}")]
    MalformedMultiIndex(Vec<usize>, usize),

    #[error("invalid metric specification: {0}")]
    InvalidSpec(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("resolution ({n_r}, {n_theta}) too small: need n_r >= 8 and even n_theta >= 16")]
    Resolution { n_r: usize, n_theta: usize },

    #[error("fiber dimension mismatch: expected {expected}, got {got}")]
    FiberMismatch { expected: usize, got: usize },

    #[error("field contains non-finite entries")]
    NonFinite,

    #[error("invalid boundary data: {0}")]
    BoundaryData(String),

    #[error("linear solver failure: {0}")]
    Factorization(String),

    #[error("least-squares solve did not converge (relative optimality residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("closed form does not apply: {0}")]
    OutOfHypothesis(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
