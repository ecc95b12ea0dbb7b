//! Experiment harness: TOML-configured ensembles over the protocol, with
//! reproducible CSV and JSON output.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    Core(#[from] dfs_scout_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_)
            | HarnessError::Core(dfs_scout_core::Error::InvalidConfig(_)) => 2,
            _ => 1,
        }
    }
}

/// Exit code for a protocol result that found nothing.
pub const EXIT_PROTOCOL_FAILURE: i32 = 3;
