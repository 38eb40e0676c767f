use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::tracker::TrackerError;
use crate::corpus::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),

    #[error("schema error: unexpected column `{0}`")]
    UnexpectedColumn(String),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("validation failed: {0}")]
    Validation(ValidationReport),

    #[error("cannot stratify into {k} folds: class {class} has only {size} members")]
    InfeasibleStratification { class: &'static str, size: usize, k: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("training data contains a single class")]
    SingleClass,

    #[error("feature width mismatch: model expects {expected}, got {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("non-finite value in feature matrix at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("report {id} lacks the `{field}` value required by the feature configuration")]
    MissingField { id: String, field: &'static str },

    #[error("embedding backend unavailable at {endpoint}: {reason}")]
    BackendUnavailable { endpoint: String, reason: String },

    #[error("embedding protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Tracker(#[from] TrackerError),

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input files or arguments rather than by
    /// a failure while running.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::MissingColumn(_)
                | Error::UnexpectedColumn(_)
                | Error::Row { .. }
                | Error::Validation(_)
                | Error::InvalidArgument(_)
                | Error::MissingField { .. }
                | Error::WidthMismatch { .. }
                | Error::Format { .. }
        )
    }
}
