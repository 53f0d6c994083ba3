use thiserror::Error;

use crate::consensus::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{0}")]
    Domain(String),

    /// The requested schedule cannot be produced under the given consensus rules.
    #[error("incompatible with consensus parameters: {0}")]
    Incompatible(String),

    /// A search or construction exceeded its configured bound.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("schedule failed validation: {0}")]
    Validation(ValidationReport),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

/// Rejects values that are not finite and strictly positive.
pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {value}")))
    }
}
