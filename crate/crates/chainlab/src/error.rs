use std::io;
use std::path::PathBuf;

use chainlab_core::Error as CoreError;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}:{line}: {source}")]
    Line {
        path: PathBuf,
        line: usize,
        source: CoreError,
    },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for bad input, 2 for failed computations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_input_error() => 2,
            CliError::Csv(_) => 2,
            _ => 1,
        }
    }
}
