//! Library side of the CLI: the JSON model schema and the sweep/event/scheme
//! parsers, shared between the binary and the test suites.

pub mod model_file;
pub mod sweep;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Analysis(#[from] polysens::Error),
    #[error("{0}")]
    Io(String),
}

impl AppError {
    /// 1 for usage/parse problems, 2 for analysis errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) | AppError::Parse(_) => 1,
            AppError::Analysis(_) | AppError::Io(_) => 2,
        }
    }
}
