use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CtError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure at iteration {iteration}: {reason}")]
    NumericalFailure { iteration: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, CtError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(CtError::InvalidArgument(msg.into()))
}
