use thiserror::Error;

/// Errors produced by kernel evaluation, simulation, and the CLI.
#[derive(Debug, Error)]
pub enum SbmError {
    /// A precondition on an argument was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An integrand was requested at a point where its boundary
    /// singularities are not exponentially damped (l = 0 or x = 0).
    #[error("undamped singularity: {0}")]
    UndampedSingularity(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SbmError>;

pub(crate) fn invalid(msg: impl Into<String>) -> SbmError {
    SbmError::InvalidInput(msg.into())
}
