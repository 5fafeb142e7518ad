use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Architecture, ClassifierModel};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "scrub-checkpoint/1";

/// Weights captured at the end of an epoch.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckpoint {
    pub weights: Vec<f64>,
    pub epoch: usize,
    pub forget_error: Option<f64>,
    pub retain_error: Option<f64>,
    pub wall_clock_seconds: f64,
}

impl std::fmt::Debug for ModelCheckpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelCheckpoint")
            .field("epoch", &self.epoch)
            .field("forget_error", &self.forget_error)
            .field("retain_error", &self.retain_error)
            .field("wall_clock_seconds", &self.wall_clock_seconds)
            .field("params", &self.weights.len())
            .finish()
    }
}

impl ModelCheckpoint {
    pub fn validate(&self) -> Result<()> {
        for e in [self.forget_error, self.retain_error].into_iter().flatten() {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidConfig(format!(
                    "checkpoint error {e} outside [0, 1]"
                )));
            }
        }
        if self.wall_clock_seconds.is_nan() || self.wall_clock_seconds < 0.0 {
            return Err(Error::InvalidConfig(
                "negative checkpoint wall clock".into(),
            ));
        }
        Ok(())
    }
}

/// On-disk checkpoint: JSON with the architecture, seed and epoch embedded.
/// Wall-clock time is deliberately absent so files are byte-stable across runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointFile {
    pub format: String,
    pub architecture: Architecture,
    pub seed: u64,
    pub epoch: usize,
    pub forget_error: Option<f64>,
    pub retain_error: Option<f64>,
    pub weights: Vec<f64>,
}

impl CheckpointFile {
    pub fn new(architecture: &Architecture, seed: u64, checkpoint: &ModelCheckpoint) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            architecture: architecture.clone(),
            seed,
            epoch: checkpoint.epoch,
            forget_error: checkpoint.forget_error,
            retain_error: checkpoint.retain_error,
            weights: checkpoint.weights.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file: CheckpointFile = serde_json::from_slice(&fs::read(path)?)?;
        if file.format != CHECKPOINT_FORMAT {
            return Err(Error::Serialization(format!(
                "unsupported checkpoint format `{}`",
                file.format
            )));
        }
        Ok(file)
    }

    pub fn model(&self) -> Result<ClassifierModel> {
        ClassifierModel::from_weights(self.architecture.clone(), self.weights.clone())
    }
}

pub fn save_model(model: &ClassifierModel, seed: u64, epoch: usize, path: &Path) -> Result<()> {
    let ckpt = ModelCheckpoint {
        weights: model.weights.clone(),
        epoch,
        forget_error: None,
        retain_error: None,
        wall_clock_seconds: 0.0,
    };
    CheckpointFile::new(&model.architecture, seed, &ckpt).write(path)
}

pub fn load_model(path: &Path) -> Result<ClassifierModel> {
    CheckpointFile::read(path)?.model()
}
