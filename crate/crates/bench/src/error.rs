use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] confined_omp::Error),
}

impl BenchError {
    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Io { .. } => 3,
            BenchError::Config(_) => 2,
            BenchError::Core(confined_omp::Error::Io(_)) => 3,
            BenchError::Core(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(BenchError::Config(msg.into()))
}
