use std::path::PathBuf;

use thiserror::Error;
use twoview::TriangulationError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
    #[error("no point is visible in both views")]
    EmptyScene,
    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl HarnessError {
    /// Process exit code: 2 for failed internal checks, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Assertion(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        HarnessError::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
