use thiserror::Error;

/// Failure classes mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error(transparent)]
    Core(bpscope_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl RunError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        RunError::Config { path: path.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config { .. } => 2,
            RunError::Assumption(_) => 3,
            _ => 1,
        }
    }
}

impl From<bpscope_core::Error> for RunError {
    fn from(e: bpscope_core::Error) -> Self {
        match e {
            bpscope_core::Error::Assumption(m) => RunError::Assumption(m),
            other => RunError::Core(other),
        }
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Other(e.into())
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Other(e.into())
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;
