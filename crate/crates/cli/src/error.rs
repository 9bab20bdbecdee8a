use std::path::PathBuf;

use sabatier_core::optim::OptimError;
use sabatier_core::problems::ExperimentError;
use sabatier_core::reactor::SolveError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Nonconvergence(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ReadConfig { .. } | CliError::Config(_) => 2,
            CliError::Nonconvergence(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Write { .. } => 1,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Config(c) => CliError::Config(c.to_string()),
            SolveError::StateSize { .. } => CliError::Config(e.to_string()),
            other => CliError::Nonconvergence(other.to_string()),
        }
    }
}

impl From<OptimError> for CliError {
    fn from(e: OptimError) -> Self {
        match e {
            OptimError::Solve(s) => s.into(),
            OptimError::Dimension { .. } => CliError::Config(e.to_string()),
            other => CliError::Nonconvergence(other.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Io(_) => CliError::Config(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
