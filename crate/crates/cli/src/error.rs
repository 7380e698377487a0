use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration, attributed to the key that caused it.
    #[error("{field}: {message}")]
    Config { field: String, message: String },

    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },

    /// A core failure while evaluating a command or scenario.
    #[error("{context}: {source}")]
    Eval {
        context: String,
        source: spraylab_core::Error,
    },
}
