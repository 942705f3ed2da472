use std::path::{Path, PathBuf};

use attnsched_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{path}: {source}")]
    File { path: PathBuf, source: Error },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn file(path: &Path, source: impl Into<Error>) -> Self {
        CliError::File {
            path: path.to_path_buf(),
            source: source.into(),
        }
    }

    /// 2 input error, 3 estimation failure, 4 resource cap.
    pub fn exit_code(&self) -> i32 {
        let core = match self {
            CliError::Core(e) | CliError::File { source: e, .. } => e,
            CliError::Usage(_) => return 2,
        };
        match core {
            Error::Estimation(_) => 3,
            Error::CapExceeded { .. } => 4,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
