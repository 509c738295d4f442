use thiserror::Error;

/// Errors reported by the construction, coding and simulation APIs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("target rate {target} is outside the solver bracket [{low}, {high}] bits")]
    Bracket { target: f64, low: f64, high: f64 },
    #[error("malformed data: {0}")]
    Data(String),
    #[error("infeasible allocation: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
