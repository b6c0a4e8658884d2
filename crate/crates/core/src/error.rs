use std::path::PathBuf;

use thiserror::Error;

use crate::model::Dimension;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("nodes belong to different hierarchies ({left:?} vs {right:?})")]
    DimensionMismatch { left: Dimension, right: Dimension },

    #[error("unresolved location {name:?}: {reason}")]
    UnresolvedLocation { name: String, reason: String },

    #[error("unparseable date {0:?}")]
    UnparseableDate(String),

    #[error("PageRank did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("score is undefined: {0}")]
    Undefined(String),

    #[error("gazetteer request failed: {0}")]
    Gazetteer(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input or configuration rather than an
    /// internal invariant violation.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::NonConvergence { .. })
    }
}
