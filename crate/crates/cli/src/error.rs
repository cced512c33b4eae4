use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{path} contains no observations")]
    Empty { path: PathBuf },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] quadfit_core::Error),

    #[error("cannot write report: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 when a statistical route was refused, 1 for every other failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_route_refusal() => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
