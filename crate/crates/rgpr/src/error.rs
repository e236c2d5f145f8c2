//! Crate-wide error type.

/// Errors shared by all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operand shapes are inconsistent.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix expected to be symmetric positive definite failed the
    /// Cholesky factorization even after the jitter policy.
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    /// A matrix expected to be symmetric is not, beyond tolerance.
    #[error("matrix is not symmetric: |a[{i},{j}] - a[{j},{i}]| = {diff}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },

    /// An interval or parameter range is invalid.
    #[error("invalid range: {0}")]
    InvalidRange(String),

    /// An operation that requires data received none.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A training or tuning loss became NaN or infinite.
    #[error("non-finite loss at {context}: {value}")]
    NonFiniteLoss { context: String, value: f64 },

    /// Artifact or dataset file could not be read or written.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Artifact or dataset file has an invalid format.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
