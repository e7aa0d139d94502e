use std::path::PathBuf;

/// Errors produced anywhere in the training and evaluation stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid config: {0}")]
    Validation(String),

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("pair {pair_id}: cannot decode {path}: {message}")]
    Decode {
        pair_id: String,
        path: PathBuf,
        message: String,
    },

    #[error("label registry: {0}")]
    Registry(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite {what} at step {step}; batch pair ids: {pair_ids:?}")]
    NonFinite {
        what: String,
        step: u64,
        pair_ids: Vec<String>,
    },

    #[error("checkpoint {path}: {kind}")]
    Checkpoint { path: PathBuf, kind: CheckpointError },

    #[error(transparent)]
    Tensor(#[from] candle_core::Error),

    #[error("image encoding: {0}")]
    Image(#[from] image::ImageError),
}

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("config hash mismatch: checkpoint was written by config {found}, resuming config is {expected}")]
    HashMismatch { found: String, expected: String },
    #[error("corrupt file: {0}")]
    Corrupt(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the failure stems from user input (bad config, manifest,
    /// registry or checkpoint guard) rather than a runtime fault.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::Manifest(_)
            | Error::Registry(_)
            | Error::Shape(_) => true,
            Error::Io { source, .. } => source.kind() == std::io::ErrorKind::NotFound,
            Error::Checkpoint { kind, .. } => !matches!(kind, CheckpointError::Corrupt(_)),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
