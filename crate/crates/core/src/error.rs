use thiserror::Error;

#[derive(Debug, Error)]
pub enum KickedTopError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("oracle check failed: {0}")]
    OracleMismatch(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, KickedTopError>;

pub(crate) fn invalid(msg: impl Into<String>) -> KickedTopError {
    KickedTopError::InvalidInput(msg.into())
}
