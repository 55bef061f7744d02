use thiserror::Error;

/// Errors raised by the covariance-metric routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: dimension mismatch, non-finite entries, bad structure request.
    #[error("invalid input: {0}")]
    Input(String),
    /// Input outside the mathematical domain of the operation (non-PSD, non-PD).
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative method stopped before meeting its tolerance.
    #[error("not converged after {iterations} iterations: {detail}")]
    NotConverged { iterations: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
