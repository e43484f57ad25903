use std::io;

use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("malformed subword sequence: {0}")]
    MalformedSubwords(String),

    #[error("unsatisfiable constraints: {0}")]
    Unsatisfiable(String),

    #[error("positive constraint token {0:?} is not in the scorer vocabulary")]
    OutOfVocabulary(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero variance input: rank correlation is undefined")]
    ZeroVariance,

    #[error("singular normal equations; retry with l2 > 0")]
    Singular,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("missing artifact {path}; run `{command}` first")]
    MissingArtifact { path: String, command: String },

    #[error("input file {0} does not exist")]
    MissingInput(String),

    #[error("config: {0}")]
    Config(String),

    #[error("bad format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(path: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_owned(),
            line,
            message: message.into(),
        }
    }
}
