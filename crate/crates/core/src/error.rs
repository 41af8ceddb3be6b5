use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Zero sample variance; the caller falls back to a degenerate cell.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("total conflict during {step}: all fused mass fell on the empty set")]
    TotalConflict { step: String },

    #[error("no evidence: the observation detects none of the modeled access points")]
    NoEvidence,

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors raised while the pipeline runs on valid inputs
    /// (fusion conflict, missing evidence), as opposed to bad inputs.
    pub fn is_runtime(&self) -> bool {
        matches!(self, Error::TotalConflict { .. } | Error::NoEvidence)
    }
}
