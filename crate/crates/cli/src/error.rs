use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const GENERATION: i32 = 3;
    pub const IO: i32 = 4;
    pub const RUN: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("instance generation failed: {0}")]
    Generation(aavqe_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("run failed: {0}")]
    Run(aavqe_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Generation(_) => exit::GENERATION,
            CliError::Io { .. } | CliError::Format { .. } => exit::IO,
            CliError::Run(_) => exit::RUN,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> CliError {
        CliError::Validation(message.into())
    }
}

impl From<aavqe_core::Error> for CliError {
    fn from(e: aavqe_core::Error) -> Self {
        CliError::Run(e)
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
