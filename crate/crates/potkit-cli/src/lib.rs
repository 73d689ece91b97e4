//! Config-driven runs of the potkit library with reproducible CSV output.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod table;

use thiserror::Error;

pub use commands::{run, RunOutput};
pub use config::ExperimentConfig;
pub use manifest::RunManifest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(#[from] potkit::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}
