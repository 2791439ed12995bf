use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the decision framework, simulator and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Normalization over values whose maximum is zero.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid transition: event {event} is not accepted in state {state}")]
    InvalidTransition { state: String, event: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by bad user input (scenario files, flags).
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Format { .. })
    }
}

/// Reads a user-supplied input file; failures are configuration errors.
pub(crate) fn read_input(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
