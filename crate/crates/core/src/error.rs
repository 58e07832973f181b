//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// `Config` covers everything that should be rejected before any samples
/// are produced (bad filter bands, Nyquist violations, schema problems);
/// `Analysis` covers failures while reducing signals to metrics. The CLI
/// maps these to exit codes 2 and 3 respectively.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Configuration error tagged with the offending field path.
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn analysis(message: impl Into<String>) -> Self {
        Error::Analysis(message.into())
    }

    /// Prefixes the error message with pipeline context such as
    /// `stage=front follower=2`.
    pub fn with_context(self, context: &str) -> Self {
        match self {
            Error::Config { path, message } => Error::Config {
                path,
                message: format!("[{context}] {message}"),
            },
            Error::Analysis(m) => Error::Analysis(format!("[{context}] {m}")),
            Error::Parse(m) => Error::Parse(format!("[{context}] {m}")),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
