use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed caller input (bad vertex index, empty trace, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// A graph operation was handed a non-chordal edge set.
    #[error("graph structure: {0}")]
    Structure(String),

    /// Argument outside the domain of a special function or distribution.
    #[error("domain error: {0}")]
    Domain(String),

    /// Factorization failure or non-finite result.
    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("data: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by the caller's configuration or arguments
    /// rather than by the run itself.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
