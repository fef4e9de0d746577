use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("column not found: {0}")]
    ColumnNotFound(String),

    #[error("line {line}: cannot parse timestamp {value:?}")]
    Timestamp { line: u64, value: String },

    #[error("line {line}: cannot parse value {value:?} in column {column}")]
    Value {
        line: u64,
        column: String,
        value: String,
    },

    #[error("column {0} is entirely missing")]
    AllMissing(String),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("singular covariance: {0}")]
    SingularCovariance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty split: {0}")]
    EmptySplit(String),

    #[error("threshold {threshold} cannot be applied to a {value_kind} value")]
    IncompatibleThreshold {
        threshold: &'static str,
        value_kind: &'static str,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors that mean "this sample cannot be evaluated" rather than a broken input.
    pub fn is_unevaluable(&self) -> bool {
        matches!(
            self,
            Error::InsufficientData(_) | Error::Degenerate(_) | Error::SingularCovariance(_)
        )
    }
}
