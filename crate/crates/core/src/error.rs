use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("corpus is empty, no statistics available")]
    EmptyCorpus,

    #[error("lemma {0:?} is not present in the lexicon")]
    UnknownLemma(String),

    #[error("malformed input at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("index format mismatch: {0}")]
    Format(String),

    #[error("query has no words")]
    EmptyQuery,

    #[error("query set is empty")]
    EmptyQuerySet,
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    /// True when the error came from the filesystem rather than from bad input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}
