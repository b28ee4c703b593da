use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("superposition of the given states has zero norm")]
    DegenerateSuperposition,

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("operation `{operation}` is not supported for the {kind} kernel")]
    UnsupportedForKind {
        operation: &'static str,
        kind: &'static str,
    },

    #[error("point set is not informationally complete: design rank {rank}, need {required}")]
    NotInformationallyComplete { rank: usize, required: usize },

    #[error("underdetermined oscillation fit: {0}")]
    UnderdeterminedFit(String),

    #[error("malformed JSON at line {line}, column {column}: {message}")]
    MalformedJson {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown tag: {0}")]
    UnknownTag(String),

    #[error("schema violation at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed or inconsistent input data rather
    /// than by the numerics of a well-formed request.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::MalformedJson { .. }
                | Error::UnknownTag(_)
                | Error::Schema { .. }
                | Error::Io { .. }
                | Error::Csv(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::MalformedJson {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
