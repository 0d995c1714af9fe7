use std::path::Path;

use thiserror::Error;

/// Failures that abort a run. Per-frame problems are not represented here;
/// they are logged and counted instead.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> CliError {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<hmrf_core::Error> for CliError {
    fn from(err: hmrf_core::Error) -> Self {
        match err {
            hmrf_core::Error::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
