use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema mismatch in {path}: expected header `{expected}`, found `{found}`")]
    Schema { path: PathBuf, expected: String, found: String },
    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("inconsistent operation stream, offending order ids: {0:?}")]
    InconsistentOps(Vec<u64>),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("missing calibration artifact `{0}`")]
    MissingArtifact(String),
    #[error("fill and baseline series are not aligned at step {0}")]
    Alignment(u64),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Domain errors (bad data) as opposed to usage or IO failures.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_) | Error::Insufficient(_) | Error::InconsistentOps(_) | Error::Alignment(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
