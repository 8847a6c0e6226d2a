use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read corpus at {path}: {reason}")]
    Ingestion { path: PathBuf, reason: String },

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error(
        "cannot stratify: class `{class}` has {count} documents but {folds} folds were requested"
    )]
    Stratification {
        class: String,
        count: usize,
        folds: usize,
    },

    #[error("fold {fold}: class `{class}` has no training documents")]
    UnseenClass { fold: usize, class: String },

    #[error("class `{0}` has no training rows")]
    EmptyClass(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("every training document is empty after preprocessing")]
    EmptyVocabulary,

    #[error("requested {requested} features but only {available} exist")]
    Budget { requested: usize, available: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_fold(self, fold: usize) -> Self {
        Error::Fold {
            fold,
            source: Box::new(self),
        }
    }
}
