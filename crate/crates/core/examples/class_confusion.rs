//! Label-confusion removal: swap labels between two classes, train on the
//! corrupted data, then unlearn the mislabeled examples and watch the
//! confusion between the pair drop.

mod support;

use scrub::data::MatchedValidation;
use scrub::unlearn::UnlearningTask;
use scrub::{
    build_matched_validation, confusion_matrix, fgt_err, finetune, ic_err, init_model,
    inject_confusion, load_dataset, scrub, train, Architecture, ClassifierModel, ConfusionSpec,
    TrainConfig,
};

fn show(
    name: &str,
    model: &ClassifierModel,
    task: &UnlearningTask,
    spec: &ConfusionSpec,
) -> scrub::Result<()> {
    let m = confusion_matrix(model, &task.test)?;
    println!(
        "{name:<9} IC test {:>5.1}%  Fgt test {:>4}",
        100.0 * ic_err(&m, spec.class_a, spec.class_b)?,
        fgt_err(&m, spec.class_a, spec.class_b)?
    );
    Ok(())
}

fn main() -> scrub::Result<()> {
    let seed = 0;
    let splits = load_dataset(&support::source(), seed)?;
    let spec = ConfusionSpec {
        class_a: 0,
        class_b: 1,
        count_per_class: 50,
    };
    let c = inject_confusion(&splits.train, &spec, seed)?;
    let matched = match build_matched_validation(&splits.validation, &c.forget, &c.retain)? {
        MatchedValidation::Validation(m) => m,
        MatchedValidation::RetainHoldout { .. } => unreachable!("validation covers every class"),
    };
    let init = init_model(Architecture::mlp(16, &[128], 5)?, seed)?;
    let original = train(&init, &c.confused_train, &support::original_recipe(seed))?;
    let task = UnlearningTask::new(original, c.retain, c.forget, matched, splits.test)?;

    show("original", &task.original, &task, &spec)?;
    show(
        "finetune",
        &finetune(&task, &TrainConfig::finetune(seed))?,
        &task,
        &spec,
    )?;
    show(
        "scrub",
        &scrub(&task, &support::scrub_config(seed))?.0,
        &task,
        &spec,
    )?;
    Ok(())
}
