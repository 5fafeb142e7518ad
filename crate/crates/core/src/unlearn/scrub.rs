//! SCRUB: alternating max/min epochs against a frozen teacher.
//!
//! The student starts at the teacher's weights. For epoch `i` in
//! `1..=total_steps`, if `i <= max_steps` a max-epoch first ascends the mean
//! KL(teacher || student) over forget batches; then a min-epoch descends
//! `alpha * KL + gamma * cross-entropy` over retain batches. Epochs past
//! `max_steps` are min-only and restore retain performance. A checkpoint
//! with forget and retain error is recorded after every epoch.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::rewind::CheckpointTrail;
use super::UnlearningTask;
use crate::data::{Example, LabeledDataset};
use crate::error::{Error, Result};
use crate::model::objective::{self, LossTerm, Target, KL_PROBABILITY_FLOOR};
use crate::model::{
    evaluate_error, ClassifierModel, ModelCheckpoint, Optimizer, OptimizerKind, Stepper,
};
use crate::rng::{self, EpochOrder};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScrubConfig {
    /// Weight of the retain-set KL term.
    pub alpha: f64,
    /// Weight of the retain-set cross-entropy term.
    pub gamma: f64,
    /// Number of leading epochs that include a max-epoch.
    pub max_steps: usize,
    /// Total number of epochs; each one ends with a min-epoch.
    pub total_steps: usize,
    pub forget_batch_size: usize,
    pub retain_batch_size: usize,
    pub learning_rate: f64,
    /// Multiplier applied to the learning rate for epochs after `lr_decay_epoch`.
    #[serde(default = "one")]
    pub lr_decay_factor: f64,
    #[serde(default)]
    pub lr_decay_epoch: Option<usize>,
    #[serde(default = "adaptive")]
    pub optimizer: OptimizerKind,
    #[serde(default)]
    pub momentum: f64,
    #[serde(default)]
    pub weight_decay: f64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

fn adaptive() -> OptimizerKind {
    OptimizerKind::Adaptive
}

impl ScrubConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.total_steps == 0 {
            return bad("total_steps must be at least 1".into());
        }
        if self.max_steps > self.total_steps {
            return bad(format!(
                "max_steps {} exceeds total_steps {}",
                self.max_steps, self.total_steps
            ));
        }
        if self.forget_batch_size == 0 || self.retain_batch_size == 0 {
            return bad("batch sizes must be at least 1".into());
        }
        if !(self.alpha >= 0.0 && self.gamma >= 0.0) {
            return bad("alpha and gamma must be nonnegative".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive".into());
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor <= 1.0) {
            return bad("lr_decay_factor must lie in (0, 1]".into());
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)".into());
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return bad("weight_decay must be nonnegative".into());
        }
        Ok(())
    }

    /// Learning rate used during `epoch` (1-based).
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        match self.lr_decay_epoch {
            Some(d) if epoch > d => self.learning_rate * self.lr_decay_factor,
            _ => self.learning_rate,
        }
    }

    fn optimizer(&self, student: &ClassifierModel) -> Optimizer {
        let n = student.weights().len();
        Optimizer::new(
            self.optimizer,
            self.learning_rate,
            self.momentum,
            self.weight_decay,
            n,
            std::iter::once(0..n).collect(),
        )
    }
}

/// A per-experiment schedule: batch sizes and step counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScrubPreset {
    pub model: &'static str,
    pub dataset: &'static str,
    pub unlearning: &'static str,
    pub forget_batch_size: usize,
    pub retain_batch_size: usize,
    pub max_steps: usize,
    /// Number of min-epochs, i.e. `total_steps`.
    pub min_steps: usize,
}

macro_rules! preset {
    ($m:literal, $d:literal, $u:literal, $fb:literal, $rb:literal, $max:literal, $min:literal) => {
        ScrubPreset {
            model: $m,
            dataset: $d,
            unlearning: $u,
            forget_batch_size: $fb,
            retain_batch_size: $rb,
            max_steps: $max,
            min_steps: $min,
        }
    };
}

pub const SCRUB_PRESETS: &[ScrubPreset] = &[
    preset!("resnet", "cifar-10", "class", 512, 128, 2, 3),
    preset!("resnet", "cifar-10", "selective", 16, 64, 5, 5),
    preset!("resnet", "lacuna-10", "class", 128, 128, 5, 5),
    preset!("resnet", "lacuna-10", "selective", 32, 32, 4, 4),
    preset!("resnet", "cifar-5", "selective", 32, 32, 10, 10),
    preset!("resnet", "lacuna-5", "selective", 32, 32, 5, 10),
    preset!("all-cnn", "cifar-10", "class", 512, 256, 3, 4),
    preset!("all-cnn", "cifar-10", "selective", 16, 64, 5, 5),
    preset!("all-cnn", "lacuna-10", "class", 32, 32, 4, 4),
    preset!("all-cnn", "lacuna-10", "selective", 8, 32, 2, 4),
    preset!("all-cnn", "cifar-5", "selective", 16, 32, 5, 10),
    preset!("all-cnn", "lacuna-5", "selective", 32, 32, 5, 10),
];

impl ScrubPreset {
    /// Small-scale optimizer recipe (Adam, lr 5e-4, weight decay 0.1,
    /// momentum 0.9) with this preset's schedule.
    pub fn config(&self, alpha: f64, gamma: f64, seed: u64) -> ScrubConfig {
        ScrubConfig {
            alpha,
            gamma,
            max_steps: self.max_steps,
            total_steps: self.min_steps.max(self.max_steps),
            forget_batch_size: self.forget_batch_size,
            retain_batch_size: self.retain_batch_size,
            learning_rate: 5e-4,
            lr_decay_factor: 0.1,
            lr_decay_epoch: None,
            optimizer: OptimizerKind::Adaptive,
            momentum: 0.9,
            weight_decay: 0.1,
            seed,
        }
    }
}

/// `KL(teacher || student) = sum_c t_c ln(t_c / max(s_c, 1e-12))`, with
/// `0 ln 0 = 0`.
pub fn kl_distance(teacher: &[f64], student: &[f64]) -> Result<f64> {
    if teacher.len() != student.len() {
        return Err(Error::DimensionMismatch {
            expected: teacher.len(),
            got: student.len(),
        });
    }
    for (name, p) in [("teacher", teacher), ("student", student)] {
        if p.is_empty() || p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "{name} has negative or non-finite entries"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidDistribution(format!("{name} sums to {sum}")));
        }
    }
    Ok(teacher
        .iter()
        .zip(student)
        .filter(|(&t, _)| t > 0.0)
        .map(|(&t, &s)| t * (t.ln() - s.max(KL_PROBABILITY_FLOOR).ln()))
        .sum())
}

/// Teacher class probabilities for every example of `data`.
pub fn teacher_probabilities(
    teacher: &ClassifierModel,
    data: &LabeledDataset,
) -> Result<Vec<Vec<f64>>> {
    data.iter()
        .map(|e| teacher.logits(&e.features).map(|z| objective::softmax(&z)))
        .collect()
}

/// Terms whose descent is one max-step: `-(1/|b|) sum KL(teacher || student)`.
pub fn max_step_terms<'a>(batch: &[&'a Example], teacher: &[&'a [f64]]) -> Vec<LossTerm<'a>> {
    let w = -1.0 / batch.len() as f64;
    batch
        .iter()
        .zip(teacher)
        .map(|(e, &t)| LossTerm {
            features: &e.features,
            target: Target::Teacher(t),
            weight: w,
        })
        .collect()
}

/// Terms whose descent is one min-step:
/// `(1/|b|) sum [alpha KL(teacher || student) + gamma CE(student, y)]`.
pub fn min_step_terms<'a>(
    batch: &[&'a Example],
    teacher: &[&'a [f64]],
    alpha: f64,
    gamma: f64,
) -> Vec<LossTerm<'a>> {
    let n = batch.len() as f64;
    let mut terms = Vec::with_capacity(2 * batch.len());
    for (e, &t) in batch.iter().zip(teacher) {
        terms.push(LossTerm {
            features: &e.features,
            target: Target::Teacher(t),
            weight: alpha / n,
        });
        terms.push(LossTerm {
            features: &e.features,
            target: Target::Label(e.label),
            weight: gamma / n,
        });
    }
    terms
}

struct EpochRunner<'a> {
    config: &'a ScrubConfig,
    stepper: Stepper,
    forget: &'a LabeledDataset,
    retain: &'a LabeledDataset,
    teacher_forget: Vec<Vec<f64>>,
    teacher_retain: Vec<Vec<f64>>,
    forget_order: EpochOrder,
    retain_order: EpochOrder,
}

impl<'a> EpochRunner<'a> {
    fn new(
        student: &ClassifierModel,
        teacher: &ClassifierModel,
        forget: &'a LabeledDataset,
        retain: &'a LabeledDataset,
        config: &'a ScrubConfig,
    ) -> Result<Self> {
        Ok(Self {
            config,
            stepper: Stepper::new(student.clone(), config.optimizer(student)),
            forget,
            retain,
            teacher_forget: teacher_probabilities(teacher, forget)?,
            teacher_retain: teacher_probabilities(teacher, retain)?,
            forget_order: EpochOrder::new(config.seed, rng::FORGET, forget.len()),
            retain_order: EpochOrder::new(config.seed, rng::RETAIN, retain.len()),
        })
    }

    fn max_epoch(&mut self, epoch: usize) -> Result<()> {
        let perm = self.forget_order.next_epoch();
        for batch in perm.chunks(self.config.forget_batch_size) {
            let examples = self.forget.select(batch);
            let teacher: Vec<&[f64]> = batch.iter().map(|&i| &self.teacher_forget[i][..]).collect();
            let terms = max_step_terms(&examples, &teacher);
            self.stepper.descend(&terms, epoch)?;
        }
        self.stepper.check_weights(epoch)
    }

    fn min_epoch(&mut self, epoch: usize) -> Result<()> {
        let perm = self.retain_order.next_epoch();
        for batch in perm.chunks(self.config.retain_batch_size) {
            let examples = self.retain.select(batch);
            let teacher: Vec<&[f64]> = batch.iter().map(|&i| &self.teacher_retain[i][..]).collect();
            let terms = min_step_terms(&examples, &teacher, self.config.alpha, self.config.gamma);
            self.stepper.descend(&terms, epoch)?;
        }
        self.stepper.check_weights(epoch)
    }
}

fn check_inputs(
    student: &ClassifierModel,
    teacher: &ClassifierModel,
    data: &LabeledDataset,
) -> Result<()> {
    if student.architecture() != teacher.architecture() {
        return Err(Error::InvalidArchitecture(
            "student and teacher architectures differ".into(),
        ));
    }
    if !data.is_empty() {
        student.check_dataset(data)?;
    }
    Ok(())
}

/// One max-epoch over `forget` from a fresh optimizer. An empty forget set
/// returns the student unchanged.
pub fn do_max_epoch(
    student: &ClassifierModel,
    teacher: &ClassifierModel,
    forget: &LabeledDataset,
    config: &ScrubConfig,
) -> Result<ClassifierModel> {
    config.validate()?;
    check_inputs(student, teacher, forget)?;
    let empty = forget.filter(|_| false);
    let mut runner = EpochRunner::new(student, teacher, forget, &empty, config)?;
    runner.max_epoch(1)?;
    Ok(runner.stepper.into_model())
}

/// One min-epoch over `retain` from a fresh optimizer.
pub fn do_min_epoch(
    student: &ClassifierModel,
    teacher: &ClassifierModel,
    retain: &LabeledDataset,
    config: &ScrubConfig,
) -> Result<ClassifierModel> {
    config.validate()?;
    if retain.is_empty() {
        return Err(Error::EmptyDataset("retain set".into()));
    }
    check_inputs(student, teacher, retain)?;
    let empty = retain.filter(|_| false);
    let mut runner = EpochRunner::new(student, teacher, &empty, retain, config)?;
    runner.min_epoch(1)?;
    Ok(runner.stepper.into_model())
}

/// Runs SCRUB and returns the final student with its per-epoch trail.
///
/// On divergence the error carries the checkpoints recorded so far.
pub fn scrub(
    task: &UnlearningTask,
    config: &ScrubConfig,
) -> Result<(ClassifierModel, CheckpointTrail)> {
    config.validate()?;
    task.validate()?;
    let start = Instant::now();
    let mut runner = EpochRunner::new(
        &task.original,
        &task.original,
        &task.forget,
        &task.retain,
        config,
    )?;
    let mut trail = CheckpointTrail::default();

    for epoch in 1..=config.total_steps {
        runner
            .stepper
            .set_learning_rate(config.learning_rate_at(epoch));
        let step = (|| {
            if epoch <= config.max_steps {
                runner.max_epoch(epoch)?;
            }
            runner.min_epoch(epoch)
        })();
        if let Err(e) = step {
            return Err(match e {
                Error::Diverged { epoch, loss } => Error::ScrubDiverged {
                    epoch,
                    loss,
                    trail: Box::new(trail),
                },
                other => other,
            });
        }

        let student = &runner.stepper.model;
        let forget_error = if task.forget.is_empty() {
            None
        } else {
            Some(evaluate_error(student, &task.forget)?)
        };
        trail.push(ModelCheckpoint {
            weights: student.weights().to_vec(),
            epoch,
            forget_error,
            retain_error: Some(evaluate_error(student, &task.retain)?),
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        })?;
    }
    Ok((runner.stepper.into_model(), trail))
}
