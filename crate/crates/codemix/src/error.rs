use std::io;
use std::path::PathBuf;

use codemix_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: malformed model file: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("usage error: {0}")]
    Usage(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 usage, 2 data/IO/format/training, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(CoreError::Usage(_) | CoreError::Config(_)) => 1,
            CliError::Core(CoreError::Numeric(_)) => 3,
            _ => 2,
        }
    }
}
