use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Training data contains a single class (or no usable split point).
    #[error("degenerate training set: {0}")]
    DegenerateTraining(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("duplicate pair in {path}: line {first} and line {second}")]
    DuplicatePair {
        path: PathBuf,
        first: u64,
        second: u64,
    },

    #[error("numerical blow-up: {0}")]
    NonFinite(String),

    #[error("format version mismatch: file has {found}, expected {expected}")]
    VersionMismatch { found: String, expected: String },

    #[error("label source failed: {0}")]
    LabelSource(String),

    #[error("unknown task {0}")]
    UnknownTask(u64),

    #[error("task {0} already labelled")]
    TaskCompleted(u64),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used by the CLI and the HTTP service.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateTraining(_) => "degenerate_training",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Parse { .. } => "parse",
            Error::DuplicatePair { .. } => "duplicate_pair",
            Error::NonFinite(_) => "non_finite",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::LabelSource(_) => "label_source",
            Error::UnknownTask(_) => "unknown_task",
            Error::TaskCompleted(_) => "task_completed",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
