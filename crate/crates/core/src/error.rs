use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value handed to an operation violates its precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Configuration is inconsistent or names something unsupported.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("ingestion error: {0}")]
    Ingest(String),

    #[error("ingestion error at {path}:{line}: {msg}")]
    IngestLine {
        path: String,
        line: usize,
        msg: String,
    },

    /// The oracle could not produce a feasible super arm.
    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("simulation error: {0}")]
    Simulation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Ingest(_) | Error::IngestLine { .. } => 3,
            Error::Argument(_) | Error::Oracle(_) | Error::Simulation(_) | Error::Io { .. } => 4,
        }
    }
}
