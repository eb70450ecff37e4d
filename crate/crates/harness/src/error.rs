use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("fixture error: {0}")]
    Fixture(String),
}

impl HarnessError {
    /// 1 for fixture failures, 2 for anything wrong with the inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Fixture(_) | HarnessError::Write { .. } => 1,
            _ => 2,
        }
    }
}

impl From<qsmpc_core::mpsi::MpsiError> for HarnessError {
    fn from(e: qsmpc_core::mpsi::MpsiError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<qsmpc_core::ole::OleError> for HarnessError {
    fn from(e: qsmpc_core::ole::OleError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<qsmpc_core::ring::RingError> for HarnessError {
    fn from(e: qsmpc_core::ring::RingError) -> Self {
        HarnessError::Config(e.to_string())
    }
}
