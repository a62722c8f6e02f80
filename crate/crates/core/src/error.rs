use thiserror::Error;

/// Errors raised by every computation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Index, arity or parameter-range violation.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Input outside the mathematical domain of an operation (non-normalized
    /// moments, zero frequencies, inconsistent moment sequences, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Working precision too low to resolve a quantity; retrying at a higher
    /// precision may succeed.
    #[error("precision failure at index {index}: {detail}")]
    Precision { index: usize, detail: String },

    /// A requested quantity is infinite for the given parameters.
    #[error("divergence: {0}")]
    Divergence(String),

    /// Krylov-chain truncation could not be made small enough.
    #[error("truncation failure: {0}")]
    Truncation(String),

    /// Adaptive quadrature failed to converge on the reported momentum panel.
    #[error("quadrature did not converge on panel [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64 },

    /// Two independent routes to the same quantity disagree.
    #[error("cross-check mismatch: {0}")]
    CrossCheck(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Self::Argument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Self::Domain(msg.into())
    }
}
