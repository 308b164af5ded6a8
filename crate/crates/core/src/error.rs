use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("base index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("cannot remove base index {index}: not present in multi-index")]
    RemoveAbsent { index: usize },

    #[error("shape mismatch: {0}")]
    Mismatch(String),

    #[error("component convention mismatch: {0}")]
    Convention(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular map: {0}")]
    Singular(String),

    #[error("evaluation failed: {0}")]
    Eval(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn mismatch(msg: impl Into<String>) -> Error {
    Error::Mismatch(msg.into())
}
