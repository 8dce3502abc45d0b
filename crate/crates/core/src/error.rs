use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = ProbeError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("no valid records in {what} ({malformed} malformed lines)")]
    EmptyDataset { what: String, malformed: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("{path}:{line}: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("insufficient corpus: requested {requested} sentences but only {eligible} are eligible")]
    InsufficientCorpus { requested: usize, eligible: usize },

    #[error("non-finite loss at step {step} (batch fingerprint {fingerprint})")]
    NonFiniteLoss { step: usize, fingerprint: String },

    #[error("index build error: {0}")]
    IndexBuild(String),

    #[error("generator failed on query {query_id}: {message}")]
    Generator { query_id: String, message: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl ProbeError {
    pub(crate) fn input(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ProbeError::Input {
            path: path.into(),
            source,
        }
    }
}
