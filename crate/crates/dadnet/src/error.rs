use thiserror::Error;

use crate::model::ValidationReport;
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum DadError {
    #[error("validation failed:\n{0}")]
    Validation(ValidationReport),
    #[error("model error: {0}")]
    Model(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
}

impl DadError {
    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        DadError::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, DadError>;
