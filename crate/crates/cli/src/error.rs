use std::path::PathBuf;

use ctrecon::CtError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("numerical failure at iteration {iteration}: {reason}")]
    Numerical { iteration: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Invalid(_) => 1,
            CliError::Numerical { .. } => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CtError> for CliError {
    fn from(e: CtError) -> Self {
        match e {
            CtError::InvalidArgument(msg) => CliError::Invalid(msg),
            CtError::NumericalFailure { iteration, reason } => {
                CliError::Numerical { iteration, reason }
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
