use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced anywhere in the clustering pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("trajectory {id}: {reason}")]
    InvalidTrajectory { id: String, reason: String },

    #[error("degenerate {axis} dimension: every point has {axis} = {value}")]
    DegenerateDimension { axis: char, value: f64 },

    #[error("empty point sequence passed to dtw")]
    EmptySequence,

    #[error("dtw between {a} and {b} failed: {source}")]
    PairFailed {
        a: String,
        b: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid dissimilarity matrix: {0}")]
    InvalidMatrix(String),

    #[error("empty member set")]
    EmptyMembers,

    #[error("k = {k} out of range [{min}, {max}]")]
    KOutOfRange { k: usize, min: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coincident medoids {a} and {b} (distance 0)")]
    CoincidentMedoids { a: usize, b: usize },

    #[error("metric needs at least {needed} clusters, got {got}")]
    TooFewClusters { needed: usize, got: usize },

    #[error("every k in [{k_min}, {k_max}] was unscoreable")]
    AllUnscoreable { k_min: usize, k_max: usize },

    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: u64, reason: String },

    #[error("{path}: missing column {column}")]
    MissingColumn { path: PathBuf, column: String },

    #[error("matrix cache {path}: {reason}")]
    Cache { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("worker pool: {0}")]
    Pool(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the input data rather than by the computation.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::EmptyDataset
                | Error::InvalidTrajectory { .. }
                | Error::DegenerateDimension { .. }
                | Error::Parse { .. }
                | Error::MissingColumn { .. }
                | Error::Cache { .. }
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
