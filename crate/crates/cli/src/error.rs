use std::path::{Path, PathBuf};

use epiconfound_core::EstimateError;
use epiconfound_oracle::OracleError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid instance: {0}")]
    Oracle(#[from] OracleError),
    #[error("estimation failed: {0}")]
    Estimate(#[from] EstimateError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("no trajectory followed the target path for any of the {thresholds} thresholds")]
    EmptyConditioning { thresholds: usize },
    #[error(
        "{violations} of {checked} instances have non-negative bias despite being opportunistic"
    )]
    TheoremViolation { violations: usize, checked: usize },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::TheoremViolation { .. } => 1,
            Self::Config(_) | Self::Oracle(_) | Self::Estimate(_) => 2,
            Self::EmptyConditioning { .. } => 3,
            Self::Io { .. } => 4,
        }
    }
}
