use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: pgg_core::Error },

    #[error("{}: invalid JSON: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },

    #[error(transparent)]
    Core(#[from] pgg_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("search budget of {0} nodes exhausted")]
    Budget(u64),
}

impl CliError {
    /// 2 for usage, input and parse problems, 3 when a size or search limit was hit.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Budget(_)
            | CliError::Core(pgg_core::Error::Capacity(_))
            | CliError::Input { source: pgg_core::Error::Capacity(_), .. } => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
