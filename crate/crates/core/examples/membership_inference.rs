//! Loss-based membership inference: how well can a logistic attacker tell
//! forget-set losses from test losses? Near 50% means the forget set looks
//! like data the model never saw.

mod support;

use scrub::{mia_score, retrain, rewind, scrub};

fn main() -> scrub::Result<()> {
    let desk = support::selective(0)?;
    let task = &desk.task;
    let attack_test = task
        .test
        .restrict_to_classes(&task.forget.clean_label_set());

    let (model, trail) = scrub(task, &support::scrub_config(0))?;
    let scrub_r = rewind(&trail, &model, task)?.model;
    let retrained = retrain(task, &desk.init, &support::original_recipe(0))?;
    for (name, m) in [
        ("original", &task.original),
        ("retrain", &retrained),
        ("scrub+r", &scrub_r),
    ] {
        let r = mia_score(m, &task.forget, &attack_test, 0)?;
        println!(
            "{name:<9} attack accuracy {:>5.1}% +/- {:.1} over {} folds ({} forget vs {} test examples)",
            100.0 * r.attack_accuracy_mean,
            100.0 * r.attack_accuracy_std,
            r.fold_accuracies.len(),
            r.n_forget,
            r.n_test
        );
    }
    Ok(())
}
