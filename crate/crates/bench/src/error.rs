use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ipgq::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("QASM line {line}: {message}")]
    Qasm { line: usize, message: String },
    #[error("numerical abort: {0}")]
    NumericalAbort(String),
}

impl BenchError {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::NumericalAbort(_) | BenchError::Core(ipgq::Error::Numerical(_)) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
