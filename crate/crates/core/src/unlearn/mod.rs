//! Unlearning methods.
//!
//! [`scrub`] is the teacher-student method; [`rewind`] turns its checkpoint
//! trail into SCRUB+R. The baselines cover the usual reference points:
//! [`retrain`] from scratch (the gold standard), [`finetune`] on the retain
//! set, [`neggrad`], [`cf_k`] (catastrophic forgetting of the last blocks)
//! and [`eu_k`] (exact unlearning of the last blocks).

mod baselines;
mod rewind;
mod scrub;

use std::collections::HashSet;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::model::ClassifierModel;

pub use baselines::{cf_k, eu_k, finetune, neggrad, neggrad_terms, original, retrain};
pub use rewind::{rewind, select_rewind_epoch, CheckpointTrail, RewindOutcome, TrailEntry};
pub use scrub::{
    do_max_epoch, do_min_epoch, kl_distance, max_step_terms, min_step_terms, scrub,
    teacher_probabilities, ScrubConfig, ScrubPreset, SCRUB_PRESETS,
};

/// Everything an unlearning method consumes.
#[derive(Clone, Debug)]
pub struct UnlearningTask {
    /// The model trained on retain and forget data; SCRUB's frozen teacher.
    pub original: ClassifierModel,
    pub retain: LabeledDataset,
    pub forget: LabeledDataset,
    /// Held-out data distributed like the forget set, used by rewinding.
    pub matched_validation: LabeledDataset,
    pub test: LabeledDataset,
}

impl UnlearningTask {
    pub fn new(
        original: ClassifierModel,
        retain: LabeledDataset,
        forget: LabeledDataset,
        matched_validation: LabeledDataset,
        test: LabeledDataset,
    ) -> Result<Self> {
        let task = Self {
            original,
            retain,
            forget,
            matched_validation,
            test,
        };
        task.validate()?;
        Ok(task)
    }

    pub fn validate(&self) -> Result<()> {
        let retain: HashSet<_> = self.retain.iter().map(|e| e.id).collect();
        if let Some(e) = self.forget.iter().find(|e| retain.contains(&e.id)) {
            return Err(Error::InvalidSplit(format!(
                "example {:?} is in both retain and forget sets",
                e.id
            )));
        }
        if self.retain.is_empty() {
            return Err(Error::EmptyDataset("retain set".into()));
        }
        for d in [
            &self.retain,
            &self.forget,
            &self.matched_validation,
            &self.test,
        ] {
            if !d.is_empty() {
                self.original.check_dataset(d)?;
            }
        }
        Ok(())
    }
}
