use std::path::PathBuf;

use thiserror::Error;

use crate::unlearn::CheckpointTrail;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown dataset identifier `{0}`")]
    UnknownDataset(String),

    #[error("corrupted dataset archive {path}: line {line}: {reason}")]
    CorruptArchive {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("a classification dataset needs at least 2 classes, found {0}")]
    TooFewClasses(usize),

    #[error("invalid split specification: {0}")]
    InvalidSplit(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },

    #[error("malformed architecture: {0}")]
    InvalidArchitecture(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite loss {loss} at epoch {epoch}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("SCRUB diverged at epoch {epoch} after {} recorded checkpoints", trail.len())]
    ScrubDiverged {
        epoch: usize,
        loss: f64,
        trail: Box<CheckpointTrail>,
    },

    #[error("not a probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("checkpoint trail is empty")]
    EmptyTrail,

    #[error("frozen block count {k} out of range for {blocks} blocks")]
    BlockOutOfRange { k: usize, blocks: usize },

    #[error("membership inference needs more samples: {0}")]
    InsufficientSamples(String),

    #[error("value must be positive: {0}")]
    NonPositive(String),

    #[error("serialization: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable code stored in report rows for failed cells.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownDataset(_) => "unknown_dataset",
            Error::CorruptArchive { .. } => "corrupt_archive",
            Error::TooFewClasses(_) => "too_few_classes",
            Error::InvalidSplit(_) => "invalid_split",
            Error::EmptyDataset(_) => "empty_dataset",
            Error::LabelOutOfRange { .. } => "label_out_of_range",
            Error::InvalidArchitecture(_) => "invalid_architecture",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Diverged { .. } | Error::ScrubDiverged { .. } => "diverged",
            Error::InvalidDistribution(_) => "invalid_distribution",
            Error::EmptyTrail => "empty_trail",
            Error::BlockOutOfRange { .. } => "block_out_of_range",
            Error::InsufficientSamples(_) => "insufficient_samples",
            Error::NonPositive(_) => "non_positive",
            Error::Serialization(_) => "serialization",
            Error::Io(_) => "io",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<toml::ser::Error> for Error {
    fn from(e: toml::ser::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
