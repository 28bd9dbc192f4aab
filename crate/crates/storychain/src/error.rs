use thiserror::Error;

/// Errors produced by the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("duplicate article id {0:?}")]
    DuplicateId(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("unknown article id {0:?}")]
    UnknownId(String),
    #[error("malformed input at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("index cache mismatch: {0}")]
    CacheMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
