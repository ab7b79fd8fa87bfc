//! Named, reproducible experiments over `meanvalue-core`.

pub mod config;
pub mod experiments;
pub mod report;

use thiserror::Error;

pub use config::{ExperimentConfig, FileConfig, Format, Params};
pub use experiments::{find, run, Experiment, EXPERIMENTS};
pub use report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] meanvalue_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}
