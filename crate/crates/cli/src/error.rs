use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read config file {path}: {message}")]
    ConfigFile { path: PathBuf, message: String },

    #[error("checkpoint {path} belongs to a different run (stored hash {stored}, current {current})")]
    HashMismatch {
        path: PathBuf,
        stored: String,
        current: String,
    },

    #[error("malformed checkpoint {path}, line {line}: {message}")]
    Checkpoint {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{failed} grid point(s) failed; first failure: {first}")]
    PointFailures { failed: usize, first: String },

    #[error(transparent)]
    Core(#[from] rabidimer_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit code: 2 for bad input, 1 for everything that went wrong while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ConfigFile { .. } | CliError::HashMismatch { .. } => 2,
            _ => 1,
        }
    }
}
