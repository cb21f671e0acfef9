use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FearlabError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: unknown schema: {detail}")]
    UnknownSchema { path: PathBuf, detail: String },
    #[error("{path}: {bad} of {total} rows malformed (limit 10%); first: {first}")]
    TooManyMalformed {
        path: PathBuf,
        bad: usize,
        total: usize,
        first: String,
    },
    #[error("{path}:{line}: {message}")]
    Invalid {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),
    #[error("missing {path}; run `fearlab {stage}` first")]
    MissingArtifact { path: PathBuf, stage: &'static str },
    #[error("{path}: {message}")]
    Artifact { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] fearlab_core::Error),
}

impl FearlabError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FearlabError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn artifact(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        FearlabError::Artifact {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Process exit status: 1 for configuration or input that fails
    /// validation, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            FearlabError::Config(_)
            | FearlabError::UnknownSchema { .. }
            | FearlabError::TooManyMalformed { .. }
            | FearlabError::Invalid { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = FearlabError> = std::result::Result<T, E>;
