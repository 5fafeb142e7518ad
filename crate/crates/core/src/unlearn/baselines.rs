//! Reference unlearning methods.

use super::UnlearningTask;
use crate::data::Example;
use crate::error::{Error, Result};
use crate::model::objective::{LossTerm, Target};
use crate::model::{train, train_with_frozen_blocks, ClassifierModel, Stepper, TrainConfig};
use crate::rng::{self, EpochOrder};

/// The original model, untouched.
pub fn original(task: &UnlearningTask) -> ClassifierModel {
    task.original.clone()
}

/// Trains `init` from scratch on the retain set.
pub fn retrain(
    task: &UnlearningTask,
    init: &ClassifierModel,
    config: &TrainConfig,
) -> Result<ClassifierModel> {
    if init.architecture() != task.original.architecture() {
        return Err(Error::InvalidArchitecture(
            "initial model architecture differs from the original".into(),
        ));
    }
    train(init, &task.retain, config)
}

/// Continues training the original model on the retain set.
pub fn finetune(task: &UnlearningTask, config: &TrainConfig) -> Result<ClassifierModel> {
    train(&task.original, &task.retain, config)
}

/// `beta * mean CE(retain batch) - (1 - beta) * mean CE(forget batch)`.
pub fn neggrad_terms<'a>(
    retain: &[&'a Example],
    forget: &[&'a Example],
    beta: f64,
) -> Vec<LossTerm<'a>> {
    let mut terms = Vec::with_capacity(retain.len() + forget.len());
    let ce = |e: &'a Example, weight: f64| LossTerm {
        features: &e.features,
        target: Target::Label(e.label),
        weight,
    };
    let wr = beta / retain.len() as f64;
    terms.extend(retain.iter().map(|&e| ce(e, wr)));
    if !forget.is_empty() {
        let wf = -(1.0 - beta) / forget.len() as f64;
        terms.extend(forget.iter().map(|&e| ce(e, wf)));
    }
    terms
}

/// Fine-tunes the original model on [`neggrad_terms`]. Each epoch is one
/// pass over the retain set; every retain batch is paired with the next
/// forget batch of the same size, cycling through reshuffled forget passes.
pub fn neggrad(task: &UnlearningTask, beta: f64, config: &TrainConfig) -> Result<ClassifierModel> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidConfig(format!("beta {beta} outside [0, 1]")));
    }
    config.validate()?;
    task.validate()?;
    let model = &task.original;
    let mut stepper = Stepper::new(model.clone(), config.optimizer(model.architecture(), 0));
    let mut retain_order = EpochOrder::new(config.seed, rng::RETAIN, task.retain.len());
    let mut forget_order = EpochOrder::new(config.seed, rng::FORGET, task.forget.len());
    let mut forget_queue: Vec<usize> = Vec::new();

    for epoch in 1..=config.epochs {
        let perm = retain_order.next_epoch();
        for batch in perm.chunks(config.batch_size) {
            let mut forget_batch = Vec::with_capacity(config.batch_size);
            while !task.forget.is_empty()
                && forget_batch.len() < config.batch_size.min(task.forget.len())
            {
                if forget_queue.is_empty() {
                    forget_queue = forget_order.next_epoch();
                    forget_queue.reverse();
                }
                forget_batch.extend(forget_queue.pop());
            }
            let retain = task.retain.select(batch);
            let forget = task.forget.select(&forget_batch);
            let terms = neggrad_terms(&retain, &forget, beta);
            stepper.descend(&terms, epoch)?;
        }
        stepper.check_weights(epoch)?;
    }
    Ok(stepper.into_model())
}

/// Catastrophic forgetting of the last layers: freezes the first `k`
/// blocks and fine-tunes the rest on the retain set.
pub fn cf_k(task: &UnlearningTask, k: usize, config: &TrainConfig) -> Result<ClassifierModel> {
    train_with_frozen_blocks(&task.original, &task.retain, config, k)
}

/// Exact unlearning of the last layers: keeps the first `k` blocks of the
/// original, resets the remaining blocks to `init_weights` and trains them
/// on the retain set.
pub fn eu_k(
    task: &UnlearningTask,
    k: usize,
    init_weights: &[f64],
    config: &TrainConfig,
) -> Result<ClassifierModel> {
    let arch = task.original.architecture();
    if init_weights.len() != arch.param_count() {
        return Err(Error::DimensionMismatch {
            expected: arch.param_count(),
            got: init_weights.len(),
        });
    }
    let blocks = arch.num_blocks();
    if k >= blocks {
        return Err(Error::BlockOutOfRange { k, blocks });
    }
    let split = arch.block_ranges()[k].start;
    let mut weights = task.original.weights()[..split].to_vec();
    weights.extend_from_slice(&init_weights[split..]);
    let start = ClassifierModel::from_weights(arch.clone(), weights)?;
    train_with_frozen_blocks(&start, &task.retain, config, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{load_dataset, split_retain_forget, BlobsConfig, DatasetSource, ForgetSpec};
    use crate::model::OptimizerKind;
    use crate::model::{evaluate_error, init_model, Architecture};
    use crate::unlearn::{scrub, ScrubConfig};

    fn task() -> (UnlearningTask, ClassifierModel) {
        let cfg = BlobsConfig {
            num_classes: 3,
            feature_dim: 4,
            train_per_class: 20,
            validation_per_class: 5,
            test_per_class: 10,
            center_scale: 3.0,
            noise: 1.0,
        };
        let splits = load_dataset(&DatasetSource::Blobs(cfg), 2).unwrap();
        let (retain, forget) = split_retain_forget(
            &splits.train,
            &ForgetSpec::Selective {
                target_class: 0,
                count: 6,
            },
            2,
        )
        .unwrap();
        let arch = Architecture::mlp(4, &[8], 3).unwrap();
        let init = init_model(arch, 2).unwrap();
        let original = train(&init, &splits.train, &config(10)).unwrap();
        let matched = splits.validation.clone();
        let task = UnlearningTask::new(original, retain, forget, matched, splits.test).unwrap();
        (task, init)
    }

    fn config(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            learning_rate: 0.02,
            batch_size: 8,
            weight_decay: 5e-4,
            momentum: 0.9,
            optimizer: OptimizerKind::Sgd,
            seed: 5,
        }
    }

    #[test]
    fn reductions_to_finetune_and_retrain() {
        let (task, init) = task();
        let cfg = config(3);
        let ft = finetune(&task, &cfg).unwrap().weight_hash();
        assert_eq!(neggrad(&task, 1.0, &cfg).unwrap().weight_hash(), ft);
        assert_eq!(cf_k(&task, 0, &cfg).unwrap().weight_hash(), ft);
        let sc = ScrubConfig {
            alpha: 0.0,
            gamma: 1.0,
            max_steps: 0,
            total_steps: cfg.epochs,
            forget_batch_size: 8,
            retain_batch_size: cfg.batch_size,
            learning_rate: cfg.learning_rate,
            lr_decay_factor: 1.0,
            lr_decay_epoch: None,
            optimizer: cfg.optimizer,
            momentum: cfg.momentum,
            weight_decay: cfg.weight_decay,
            seed: cfg.seed,
        };
        assert_eq!(scrub(&task, &sc).unwrap().0.weight_hash(), ft);
        let rt = retrain(&task, &init, &cfg).unwrap().weight_hash();
        assert_eq!(
            eu_k(&task, 0, init.weights(), &cfg).unwrap().weight_hash(),
            rt
        );
    }

    #[test]
    fn zero_epoch_finetune_is_original() {
        let (task, _) = task();
        assert_eq!(finetune(&task, &config(0)).unwrap(), task.original);
    }

    #[test]
    fn eu_k_freezes_and_reinitializes() {
        let (task, init) = task();
        let out = eu_k(&task, 1, init.weights(), &config(0)).unwrap();
        let r = task.original.architecture().block_ranges();
        assert_eq!(
            &out.weights()[r[0].clone()],
            &task.original.weights()[r[0].clone()]
        );
        assert_eq!(&out.weights()[r[1].clone()], &init.weights()[r[1].clone()]);
        assert!(matches!(
            eu_k(&task, 2, init.weights(), &config(0)),
            Err(Error::BlockOutOfRange { .. })
        ));
        assert!(eu_k(&task, 0, &[0.0], &config(0)).is_err());
    }

    #[test]
    fn neggrad_raises_forget_error() {
        let (task, _) = task();
        let before = evaluate_error(&task.original, &task.forget).unwrap();
        let mut cfg = config(5);
        cfg.learning_rate = 0.05;
        let out = neggrad(&task, 0.5, &cfg).unwrap();
        assert!(evaluate_error(&out, &task.forget).unwrap() >= before);
        assert!(neggrad(&task, 1.5, &cfg).is_err());
    }

    #[test]
    fn neggrad_small_beta_diverges() {
        let (task, _) = task();
        let mut cfg = config(200);
        cfg.learning_rate = 0.5;
        cfg.weight_decay = 0.0;
        assert!(matches!(
            neggrad(&task, 0.0, &cfg),
            Err(Error::Diverged { .. })
        ));
    }
}
