use thiserror::Error;

/// Errors produced by the library. Variants are grouped by the kind of failure
/// rather than by module so callers can map them onto process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid utf-8 at byte offset {offset}")]
    Decode { offset: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
