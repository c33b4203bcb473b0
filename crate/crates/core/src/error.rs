use thiserror::Error;

/// Errors produced by the orbit toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector norm {0:.6} exceeds 1")]
    NormViolation(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A theorem's hypothesis does not hold for the supplied data. This is not a
    /// failure of the inequality itself.
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    /// A checked inequality or identity failed numerically.
    #[error("inequality violated: {0}")]
    Violation(String),

    #[error("eigenvalue gap is degenerate: lambda_{i} == lambda_{j}")]
    DegenerateGap { i: usize, j: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
