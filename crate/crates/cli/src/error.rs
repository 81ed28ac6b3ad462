use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error("{0}: {1}")]
    Csv(PathBuf, #[source] csv::Error),
    #[error("malformed trace {0}: {1}")]
    Trace(PathBuf, String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] ell0_core::Error),
}

impl CliError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
