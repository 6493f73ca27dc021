use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid query: start {start} is after end {end}")]
    InvalidQuery { start: String, end: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A record references something the network does not contain.
    #[error("record {record}: {message}")]
    Ingestion { record: usize, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("malformed index file: {0}")]
    Format(String),

    #[error("unsupported index format version {found} (expected {expected})")]
    Version { found: u16, expected: u16 },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid_query<T: std::fmt::Display>(start: T, end: T) -> Self {
        Error::InvalidQuery {
            start: start.to_string(),
            end: end.to_string(),
        }
    }
}
