use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A phase-space point or state sits too close to the edge of the periodic box.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested grid would exceed the configured memory cap.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("no convergence after {iterations} iterations (marginal gap {gap:.3e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
