//! Orchestration behind the `netdiv` binary: the `analyze` pipeline, the
//! synthetic generators and bundle verification.

use std::path::PathBuf;

pub mod analyze;
pub mod config;
pub mod generate;
pub mod verify;

#[derive(Debug, thiserror::Error)]
pub enum BundleError {
    #[error(transparent)]
    Core(#[from] netdiv_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("mismatch: {0}")]
    Mismatch(String),
}

impl BundleError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BundleError::Io {
            path: path.into(),
            source,
        }
    }
}
