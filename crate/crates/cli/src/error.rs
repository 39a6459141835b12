use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Numerical(#[from] oemlink::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("every grid point is unstable")]
    AllUnstable,
}

impl CliError {
    /// 0 success, 1 numerical failure, 2 usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Numerical(oemlink::Error::InvalidParameter { .. }) => 2,
            CliError::Numerical(_) | CliError::Io { .. } | CliError::AllUnstable => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
