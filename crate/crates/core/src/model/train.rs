use serde::{Deserialize, Serialize};

use super::objective::{self, LossTerm, Target};
use super::{Architecture, ClassifierModel, Optimizer, OptimizerKind};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng::{self, EpochOrder};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    #[serde(default)]
    pub weight_decay: f64,
    #[serde(default)]
    pub momentum: f64,
    #[serde(default = "default_optimizer")]
    pub optimizer: OptimizerKind,
    #[serde(default)]
    pub seed: u64,
}

fn default_optimizer() -> OptimizerKind {
    OptimizerKind::Sgd
}

impl TrainConfig {
    /// SGD at learning rate 0.1, weight decay 5e-4, momentum 0.9, batch 128.
    pub fn pretraining(epochs: usize, seed: u64) -> Self {
        Self {
            epochs,
            learning_rate: 0.1,
            batch_size: 128,
            weight_decay: 5e-4,
            momentum: 0.9,
            optimizer: OptimizerKind::Sgd,
            seed,
        }
    }

    /// Finetune baseline: 10 epochs of SGD at learning rate 0.01, weight decay 5e-4.
    pub fn finetune(seed: u64) -> Self {
        Self {
            epochs: 10,
            learning_rate: 0.01,
            batch_size: 32,
            weight_decay: 5e-4,
            momentum: 0.9,
            optimizer: OptimizerKind::Sgd,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return bad("weight_decay must be nonnegative");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        Ok(())
    }

    pub(crate) fn optimizer(&self, arch: &Architecture, frozen_blocks: usize) -> Optimizer {
        Optimizer::new(
            self.optimizer,
            self.learning_rate,
            self.momentum,
            self.weight_decay,
            arch.param_count(),
            trainable_ranges(arch, frozen_blocks),
        )
    }
}

pub(crate) fn trainable_ranges(
    arch: &Architecture,
    frozen_blocks: usize,
) -> Vec<std::ops::Range<usize>> {
    let ranges = arch.block_ranges();
    let start = ranges
        .get(frozen_blocks)
        .map_or(arch.param_count(), |r| r.start);
    std::iter::once(start..arch.param_count()).collect()
}

/// Weights plus optimizer, stepping on arbitrary loss-term batches.
pub(crate) struct Stepper {
    pub(crate) model: ClassifierModel,
    optimizer: Optimizer,
    grad: Vec<f64>,
}

impl Stepper {
    pub(crate) fn new(model: ClassifierModel, optimizer: Optimizer) -> Self {
        let grad = vec![0.0; model.weights.len()];
        Self {
            model,
            optimizer,
            grad,
        }
    }

    pub(crate) fn set_learning_rate(&mut self, lr: f64) {
        self.optimizer.set_learning_rate(lr);
    }

    /// One optimizer step descending `sum weight_i * loss_i`; returns the
    /// objective value before the step.
    pub(crate) fn descend(&mut self, terms: &[LossTerm<'_>], epoch: usize) -> Result<f64> {
        self.grad.fill(0.0);
        let loss = objective::accumulate_gradient(
            &self.model.architecture,
            &self.model.weights,
            terms,
            &mut self.grad,
        );
        if !loss.is_finite() || self.grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { epoch, loss });
        }
        self.optimizer.step(&mut self.model.weights, &self.grad);
        Ok(loss)
    }

    pub(crate) fn check_weights(&self, epoch: usize) -> Result<()> {
        if self.model.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Diverged {
                epoch,
                loss: f64::NAN,
            });
        }
        Ok(())
    }

    pub(crate) fn into_model(self) -> ClassifierModel {
        self.model
    }
}

/// Mean cross-entropy terms for a batch of dataset positions.
pub(crate) fn cross_entropy_terms<'a>(
    data: &'a LabeledDataset,
    batch: &[usize],
    scale: f64,
) -> Vec<LossTerm<'a>> {
    let weight = scale / batch.len() as f64;
    data.select(batch)
        .into_iter()
        .map(|e| LossTerm {
            features: &e.features,
            target: Target::Label(e.label),
            weight,
        })
        .collect()
}

/// Mini-batch descent on mean cross-entropy for `config.epochs` epochs,
/// reshuffling every epoch. Returns a new model.
pub fn train(
    model: &ClassifierModel,
    data: &LabeledDataset,
    config: &TrainConfig,
) -> Result<ClassifierModel> {
    train_with_frozen_blocks(model, data, config, 0)
}

/// Like [`train`], but the parameters of the first `frozen_blocks` blocks
/// are left bit-identical.
pub fn train_with_frozen_blocks(
    model: &ClassifierModel,
    data: &LabeledDataset,
    config: &TrainConfig,
    frozen_blocks: usize,
) -> Result<ClassifierModel> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset("training data".into()));
    }
    model.check_dataset(data)?;
    let blocks = model.architecture.num_blocks();
    if frozen_blocks >= blocks {
        return Err(Error::BlockOutOfRange {
            k: frozen_blocks,
            blocks,
        });
    }

    let optimizer = config.optimizer(&model.architecture, frozen_blocks);
    let mut stepper = Stepper::new(model.clone(), optimizer);
    let mut order = EpochOrder::new(config.seed, rng::RETAIN, data.len());
    for epoch in 1..=config.epochs {
        let perm = order.next_epoch();
        for batch in perm.chunks(config.batch_size) {
            let terms = cross_entropy_terms(data, batch, 1.0);
            stepper.descend(&terms, epoch)?;
        }
        stepper.check_weights(epoch)?;
    }
    Ok(stepper.into_model())
}
