use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} objectives, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("objective vectors need at least 2 entries, got {0}")]
    TooFewObjectives(usize),

    #[error("objective value at index {index} is not finite")]
    NonFinite { index: usize },

    #[error("exact hypervolume supports 2 or 3 objectives, got {0}")]
    UnsupportedDimension(usize),

    #[error("{0} requires a non-empty input")]
    EmptyInput(&'static str),

    #[error("{what}: need at least {required} points, got {found}")]
    TooFewPoints {
        what: &'static str,
        required: usize,
        found: usize,
    },

    #[error("weight vector must be non-zero")]
    ZeroWeight,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {index} is off the unit simplex (sum {sum})")]
    OffSimplex { index: usize, sum: f64 },

    #[error("policy {policy} needs {expected} weight vectors, context has {found}")]
    WeightCount {
        policy: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: malformed record: {reason}")]
    Format { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
