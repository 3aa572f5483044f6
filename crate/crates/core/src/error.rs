use thiserror::Error;

/// Every failure the library can report. The CLI maps these onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is invalid; `key` is the path of the offending field.
    #[error("invalid configuration at `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// An operation was called with arguments outside its contract.
    #[error("usage error: {0}")]
    Usage(String),

    /// The solver produced a non-finite state.
    #[error("solver diverged at node {node} (t = {time})")]
    Divergence { node: usize, time: f64 },

    /// A sampled functional returned a non-finite value.
    #[error("functional returned a non-finite value in scenario {scenario}, path {path}")]
    NonFinite { scenario: usize, path: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
