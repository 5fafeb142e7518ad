//! SCRUB+R: rewinding to the checkpoint whose forget error best matches a
//! reference error measured on held-out data.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::UnlearningTask;
use crate::error::{Error, Result};
use crate::model::{
    evaluate_error, Architecture, CheckpointFile, ClassifierModel, ModelCheckpoint,
};

/// Per-epoch checkpoints of one SCRUB run. Epochs are strictly increasing
/// and start at 1 or later.
#[derive(Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckpointTrail {
    checkpoints: Vec<ModelCheckpoint>,
}

impl std::fmt::Debug for CheckpointTrail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list()
            .entries(
                self.checkpoints
                    .iter()
                    .map(|c| (c.epoch, c.forget_error, c.retain_error)),
            )
            .finish()
    }
}

/// One line of the trail manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailEntry {
    pub epoch: usize,
    pub file: String,
    pub forget_error: Option<f64>,
    pub retain_error: Option<f64>,
    pub wall_clock_seconds: f64,
}

const MANIFEST: &str = "index.json";

impl CheckpointTrail {
    pub fn push(&mut self, checkpoint: ModelCheckpoint) -> Result<()> {
        checkpoint.validate()?;
        let min_epoch = self.checkpoints.last().map_or(1, |c| c.epoch + 1);
        if checkpoint.epoch < min_epoch {
            return Err(Error::InvalidConfig(format!(
                "checkpoint epoch {} must be at least {min_epoch}",
                checkpoint.epoch
            )));
        }
        self.checkpoints.push(checkpoint);
        Ok(())
    }

    pub fn from_checkpoints(checkpoints: Vec<ModelCheckpoint>) -> Result<Self> {
        let mut trail = Self::default();
        for c in checkpoints {
            trail.push(c)?;
        }
        Ok(trail)
    }

    pub fn len(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }

    pub fn checkpoints(&self) -> &[ModelCheckpoint] {
        &self.checkpoints
    }

    pub fn last(&self) -> Option<&ModelCheckpoint> {
        self.checkpoints.last()
    }

    pub fn get_epoch(&self, epoch: usize) -> Option<&ModelCheckpoint> {
        self.checkpoints.iter().find(|c| c.epoch == epoch)
    }

    /// Writes `epoch-NNNN.json` checkpoint files and an `index.json` manifest.
    pub fn save(&self, dir: &Path, architecture: &Architecture, seed: u64) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut manifest = Vec::with_capacity(self.len());
        for c in &self.checkpoints {
            let file = format!("epoch-{:04}.json", c.epoch);
            CheckpointFile::new(architecture, seed, c).write(&dir.join(&file))?;
            manifest.push(TrailEntry {
                epoch: c.epoch,
                file,
                forget_error: c.forget_error,
                retain_error: c.retain_error,
                wall_clock_seconds: c.wall_clock_seconds,
            });
        }
        fs::write(dir.join(MANIFEST), serde_json::to_vec_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: Vec<TrailEntry> = serde_json::from_slice(&fs::read(dir.join(MANIFEST))?)?;
        let mut trail = Self::default();
        for entry in manifest {
            let file = CheckpointFile::read(&dir.join(&entry.file))?;
            trail.push(ModelCheckpoint {
                weights: file.weights,
                epoch: entry.epoch,
                forget_error: entry.forget_error,
                retain_error: entry.retain_error,
                wall_clock_seconds: entry.wall_clock_seconds,
            })?;
        }
        Ok(trail)
    }
}

/// Picks the epoch to rewind to, or `None` to keep the final model.
///
/// Keeps the final model when its forget error is at most `reference`.
/// Otherwise returns the checkpoint minimizing `|forget_error - reference|`,
/// preferring the latest epoch among ties. Checkpoints without a forget
/// error are not candidates.
pub fn select_rewind_epoch(trail: &CheckpointTrail, reference: f64) -> Result<Option<usize>> {
    let last = trail.last().ok_or(Error::EmptyTrail)?;
    let final_error = last
        .forget_error
        .ok_or_else(|| Error::InvalidConfig("final checkpoint has no forget error".into()))?;
    if final_error <= reference {
        return Ok(None);
    }
    let mut best: Option<(f64, usize)> = None;
    for c in trail.checkpoints() {
        let Some(fe) = c.forget_error else { continue };
        let d = (fe - reference).abs();
        if best.is_none_or(|(bd, _)| d <= bd) {
            best = Some((d, c.epoch));
        }
    }
    Ok(best.map(|(_, epoch)| epoch))
}

#[derive(Clone, Debug)]
pub struct RewindOutcome {
    pub model: ClassifierModel,
    /// Error of the final model on the matched validation set.
    pub reference: f64,
    /// Epoch rewound to, or `None` when the final model was kept.
    pub rewound_to: Option<usize>,
}

/// Applies rewinding to a finished SCRUB run.
pub fn rewind(
    trail: &CheckpointTrail,
    final_model: &ClassifierModel,
    task: &UnlearningTask,
) -> Result<RewindOutcome> {
    if trail.is_empty() {
        return Err(Error::EmptyTrail);
    }
    if task.matched_validation.is_empty() {
        return Err(Error::EmptyDataset("matched validation set".into()));
    }
    let reference = evaluate_error(final_model, &task.matched_validation)?;
    let rewound_to = select_rewind_epoch(trail, reference)?;
    let model = match rewound_to {
        None => final_model.clone(),
        Some(epoch) => {
            let c = trail.get_epoch(epoch).ok_or(Error::EmptyTrail)?;
            ClassifierModel::from_weights(final_model.architecture().clone(), c.weights.clone())?
        }
    };
    Ok(RewindOutcome {
        model,
        reference,
        rewound_to,
    })
}
