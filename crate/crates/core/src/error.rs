use thiserror::Error;

/// Failure modes shared by the kernel, the quadrature oracle, the bound
/// catalog and the verifier.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined,
    /// or a bound's hypothesis is not met. The message names the hypothesis.
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid order {order}: negative integer orders are not supported")]
    InvalidOrder { order: f64 },

    /// An iterative method exhausted its budget before meeting its tolerance.
    #[error("{operation} did not converge ({detail})")]
    NonConvergence { operation: &'static str, detail: String },

    #[error("no sign change found for x up to x_max = {x_max}")]
    NotFound { x_max: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::InvalidDomain(msg.into())
}
