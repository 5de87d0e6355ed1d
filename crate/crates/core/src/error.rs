use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol {symbol:?} at line {line}, column {column} is not in the cipher alphabet")]
    Alphabet { symbol: char, line: usize, column: usize },

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("duplicate key element {0:?}")]
    DuplicateElement(String),

    #[error("malformed line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("element pool exhausted: {needed} elements needed, {available} available")]
    PoolExhausted { needed: usize, available: usize },

    #[error("no key element for plaintext character {0:?}")]
    MissingMapping(char),

    #[error("no key element matches the cipher at offset {position} (context {context:?})")]
    UnsegmentablePosition { position: usize, context: String },

    #[error("machine has no accepting path")]
    NoPath,

    #[error("empty training corpus")]
    EmptyCorpus,

    #[error("empty reference")]
    EmptyReference,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config {file}:{line}: {reason}")]
    Config { file: String, line: usize, reason: String },

    #[error("model file: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by bad input data or configuration, as opposed to
    /// failures while running a valid job.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Alphabet { .. }
                | Error::InvalidAlphabet(_)
                | Error::DuplicateElement(_)
                | Error::Malformed { .. }
                | Error::InvalidArgument(_)
                | Error::Config { .. }
                | Error::Model(_)
                | Error::Json(_)
                | Error::PoolExhausted { .. }
                | Error::MissingMapping(_)
                | Error::UnsegmentablePosition { .. }
                | Error::EmptyCorpus
                | Error::EmptyReference
        )
    }
}
