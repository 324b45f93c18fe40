use thiserror::Error;

/// Errors raised by the numerical core.
///
/// The variants split into two families: [`Error::is_validation`] is true for
/// bad inputs (malformed bodies, out-of-range indices, rejected functions),
/// false for numeric failures that happen on otherwise valid inputs.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index out of range 0 ≤ i < n (i = {i}, n = {n})")]
    IndexOutOfRange { i: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate body: half width {value:e} below threshold in direction {direction:?}")]
    Degenerate { value: f64, direction: Vec<f64> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver failed: {message}; terms (phi, coefficient, width) = {terms:?}")]
    Solver {
        message: String,
        terms: Vec<(String, f64, f64)>,
    },

    #[error("non-finite integrand value {value} at node {node} (direction {direction:?})")]
    NonFinite {
        node: usize,
        value: f64,
        direction: Vec<f64>,
    },

    #[error("body generation failed: {0}")]
    Generation(String),
}

impl Error {
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::IndexOutOfRange { .. } | Error::DimensionMismatch { .. }
        )
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
