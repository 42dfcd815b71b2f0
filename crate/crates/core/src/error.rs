use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = EmgError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EmgError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    #[error("config error at line {line}, field `{field}`: {message}")]
    Config {
        line: usize,
        field: String,
        message: String,
    },
}

impl EmgError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        EmgError::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        EmgError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line surface:
    /// 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            EmgError::InvalidArgument(_) | EmgError::Config { .. } => 1,
            EmgError::DimensionMismatch { .. }
            | EmgError::Io { .. }
            | EmgError::Parse { .. }
            | EmgError::Data(_) => 2,
            EmgError::Degenerate(_) | EmgError::Numerical(_) | EmgError::Diverged { .. } => 3,
        }
    }
}
