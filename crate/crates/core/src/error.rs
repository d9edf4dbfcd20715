use thiserror::Error;

/// Errors raised by the population and Markov-chain models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("statistic is undefined for an empty population")]
    EmptyPopulation,

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("linear system is numerically singular at pivot {index} (|pivot| = {pivot:e})")]
    Singular { index: usize, pivot: f64 },
}

impl ModelError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        ModelError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Whether the error stems from numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, ModelError::NotConverged { .. } | ModelError::Singular { .. })
    }
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
