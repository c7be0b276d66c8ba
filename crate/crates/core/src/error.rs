use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("catoni root search did not converge after {iterations} iterations (bracket width {width:e}, tolerance {tolerance:e})")]
    NonConvergence {
        iterations: usize,
        width: f64,
        tolerance: f64,
    },

    #[error("sensitivity lemma inapplicable: delta {delta} exceeds {limit}")]
    LemmaInapplicable { delta: f64, limit: f64 },

    #[error("confidence failure at round {round}: candidate set is empty")]
    ConfidenceFailure { round: usize },

    #[error("unknown action {action} (universe has {universe} actions)")]
    UnknownAction { action: usize, universe: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
