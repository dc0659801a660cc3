use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} index {index} out of range (bound {bound})")]
    Index {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("{}:{line}: {message}", path.display())]
    Ingestion {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("checkpoint format error: {0}")]
    CheckpointFormat(String),

    #[error("negative sampling exhausted: requested {requested}, only {available} candidates available")]
    SamplingExhausted { requested: usize, available: usize },

    #[error("split error: {0}")]
    Split(String),

    #[error("training diverged at epoch {epoch} (learning rate {learning_rate})")]
    TrainingDiverged { epoch: usize, learning_rate: f64 },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("undefined aggregate: all {0} folds were skipped")]
    UndefinedAggregate(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
