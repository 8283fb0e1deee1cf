//! Crate-wide error type.
//!
//! Constructions and measurements share one failure vocabulary: bad caller
//! parameters, inputs of the wrong shape, budgets that cannot be met, and
//! requests that are too large to honour on a desk machine.

/// Errors produced by network construction, evaluation and verification.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input vector (or matrix row) had the wrong length.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A scalar or structural parameter was outside its documented range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Supplied data (coefficients, samples, function values) was unusable.
    #[error("invalid data: {0}")]
    Data(String),

    /// A point or argument fell outside the domain a routine is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A construction could not meet its accuracy budget.
    #[error("construction failed: {0}")]
    Construction(String),

    /// The request is well-formed but too large to carry out.
    #[error("infeasible request: {0}")]
    Feasibility(String),

    /// Rejection sampling exhausted its attempt budget, which indicates a
    /// bad envelope constant.
    #[error("sampling envelope failure: {0}")]
    Envelope(String),

    /// A network or report could not be read or written.
    #[error("serialization error: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
