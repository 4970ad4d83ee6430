//! Batch front end: TOML run configurations, the `solve`, `check`, `green`
//! and `sweep` subcommands, and their result files.

pub mod artifacts;
pub mod commands;
pub mod config;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid or inconsistent run configuration.
    #[error("{0}")]
    Config(String),
    /// Missing or unreadable input file.
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] crystal_ground::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => commands::EXIT_CONFIG,
            CliError::Io(_) => commands::EXIT_FAIL,
            CliError::Model(_) => commands::EXIT_CONFIG,
        }
    }
}
