use thiserror::Error;

/// Errors raised by the numerical kernels and fitting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PfoError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e}, largest {largest:e})")]
    NotPositiveSemidefinite { eigenvalue: f64, largest: f64 },

    #[error("matrix is numerically singular (condition estimate {condition:e})")]
    NearSingular { condition: f64 },

    #[error("eigen decomposition did not converge")]
    NoConvergence,

    #[error("non-finite value produced by map at point {index}")]
    NonFinite { index: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = PfoError> = std::result::Result<T, E>;
