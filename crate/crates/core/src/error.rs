use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("display size k={k} is invalid for {n} items")]
    InvalidDisplaySize { k: usize, n: usize },

    #[error("item {0} appears more than once in the display")]
    DuplicateDisplayItem(usize),

    #[error("chosen partition is empty")]
    EmptyPartition,

    #[error("item {0} is not in the current display")]
    NotDisplayed(usize),

    #[error("session is already finished")]
    SessionFinished,

    #[error("round limit of {0} reached; finish the session")]
    RoundLimit(usize),

    #[error("malformed state snapshot: {0}")]
    Snapshot(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
