use std::path::PathBuf;

use thiserror::Error;

/// Front-end errors, mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] stacktherm_core::Error),

    #[error("verification suite reported failures")]
    VerificationFailed,

    #[error("{failed} of {total} sweep cases failed")]
    SweepPartial { failed: usize, total: usize },
}

impl CliError {
    /// 0 success, 1 usage/config, 2 solver failure, 3 partial sweep failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Core(stacktherm_core::Error::NonConvergence { .. }) => 2,
            CliError::Core(_) => 1,
            CliError::VerificationFailed => 2,
            CliError::SweepPartial { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
