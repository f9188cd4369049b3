use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("simulator budget exceeded: {0}")]
    Budget(qsmooth_core::Error),
    #[error(transparent)]
    Core(qsmooth_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl From<qsmooth_core::Error> for CliError {
    fn from(e: qsmooth_core::Error) -> Self {
        match e {
            qsmooth_core::Error::QubitBudget { .. } => Self::Budget(e),
            other => Self::Core(other),
        }
    }
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration mistakes, 3 when a circuit would not fit the
    /// simulator, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Parse { .. } => 2,
            Self::Budget(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
