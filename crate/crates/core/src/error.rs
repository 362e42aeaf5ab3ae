use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A required column or field is missing, or a file does not follow its declared layout.
    #[error("schema error: {0}")]
    Schema(String),

    /// Data parsed fine but violates a domain invariant (duplicate id, zero vector, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A caller-supplied argument is outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("embedding provider error ({context}): {message}")]
    Provider { context: String, message: String },

    #[error("no embedding stored for id {0:?}")]
    MissingEmbedding(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
