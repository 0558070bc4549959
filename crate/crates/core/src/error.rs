use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error("inverse relation {0:?} already present; inverse generation applied twice?")]
    InverseAlreadyPresent(String),

    #[error("unknown relation {0:?}")]
    UnknownRelation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0} requires at least one entity pair")]
    EmptyPairs(&'static str),

    #[error("no ranking sequences to evaluate")]
    NoSequences,

    #[error("training data needs at least one positive and one negative row")]
    TrainingData,

    #[error("malformed pool record: {0}")]
    PoolRecord(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
