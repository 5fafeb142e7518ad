//! Desk task shared by the unlearning examples: 5 overlapping Gaussian
//! classes, a wide MLP that memorizes its training set, and a forget set of
//! 50 class-0 examples.
#![allow(dead_code)]

use scrub::data::{BlobsConfig, MatchedValidation};
use scrub::unlearn::UnlearningTask;
use scrub::{
    build_matched_validation, evaluate_error, init_model, load_dataset, split_retain_forget, train,
    Architecture, ClassifierModel, DatasetSource, ForgetSpec, OptimizerKind, ScrubConfig,
    TrainConfig,
};

pub fn source() -> DatasetSource {
    DatasetSource::Blobs(BlobsConfig {
        num_classes: 5,
        feature_dim: 16,
        train_per_class: 100,
        validation_per_class: 50,
        test_per_class: 200,
        center_scale: 0.5,
        noise: 1.0,
    })
}

pub fn original_recipe(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 100,
        learning_rate: 0.05,
        batch_size: 32,
        weight_decay: 0.0,
        momentum: 0.9,
        optimizer: OptimizerKind::Sgd,
        seed,
    }
}

pub fn scrub_config(seed: u64) -> ScrubConfig {
    ScrubConfig {
        alpha: 0.001,
        gamma: 0.99,
        max_steps: 5,
        total_steps: 10,
        forget_batch_size: 16,
        retain_batch_size: 32,
        learning_rate: 0.002,
        lr_decay_factor: 1.0,
        lr_decay_epoch: None,
        optimizer: OptimizerKind::Adaptive,
        momentum: 0.0,
        weight_decay: 0.0,
        seed,
    }
}

/// The task plus the original's initial weights, which retraining reuses.
pub struct Desk {
    pub task: UnlearningTask,
    pub init: ClassifierModel,
}

pub fn selective(seed: u64) -> scrub::Result<Desk> {
    let splits = load_dataset(&source(), seed)?;
    let spec = ForgetSpec::Selective {
        target_class: 0,
        count: 50,
    };
    let (retain, forget) = split_retain_forget(&splits.train, &spec, seed)?;
    let matched = match build_matched_validation(&splits.validation, &forget, &retain)? {
        MatchedValidation::Validation(m) => m,
        MatchedValidation::RetainHoldout { .. } => unreachable!("validation covers every class"),
    };
    let init = init_model(Architecture::mlp(16, &[128], 5)?, seed)?;
    let original = train(&init, &splits.train, &original_recipe(seed))?;
    let task = UnlearningTask::new(original, retain, forget, matched, splits.test)?;
    Ok(Desk { task, init })
}

/// Prints retain, forget and test error of a model.
pub fn report(name: &str, model: &ClassifierModel, task: &UnlearningTask) -> scrub::Result<()> {
    println!(
        "{name:<10} retain {:>5.1}%  forget {:>5.1}%  test {:>5.1}%",
        100.0 * evaluate_error(model, &task.retain)?,
        100.0 * evaluate_error(model, &task.forget)?,
        100.0 * evaluate_error(model, &task.test)?
    );
    Ok(())
}
