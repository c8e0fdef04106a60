use thiserror::Error;

/// Errors raised by the library. Numerical "did not decide" results are
/// reported through [`Error::Undetermined`] rather than silently dropped.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid bracket: {0}")]
    InvalidBracket(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("undetermined: {0}")]
    Undetermined(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("evaluation point {eta} outside trajectory span [{start}, {end}]")]
    OutOfSpan { eta: f64, start: f64, end: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
