use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("lex error at {line}:{col}: {message}")]
pub struct LexError {
    pub message: String,
    pub line: u32,
    pub col: u32,
}

impl LexError {
    pub fn new(message: impl Into<String>, line: u32, col: u32) -> Self {
        Self {
            message: message.into(),
            line,
            col,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub message: String,
    pub line: u32,
    pub col: u32,
    /// Set when the parser ran out of input before the construct was complete.
    pub at_eof: bool,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("insufficient candidates: needed {needed}, only {available} available after exclusion")]
    InsufficientCandidates { needed: usize, available: usize },
    #[error("cannot extract: {0}")]
    Plan(String),
    #[error("invalid training data: {0}")]
    Data(String),
    #[error("model format: {0}")]
    ModelFormat(String),
    #[error("catalog version mismatch: model has {found}, extractor is {expected}")]
    CatalogVersion { expected: u32, found: u32 },
    #[error("dataset format: {0}")]
    Dataset(String),
    #[error("config: {0}")]
    Config(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
