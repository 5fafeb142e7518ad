//! Runs SCRUB on a selective forget set and prints the per-epoch trail:
//! max-epochs raise the forget error, min-epochs keep the retain set fit.

mod support;

use scrub::scrub;

fn main() -> scrub::Result<()> {
    let desk = support::selective(0)?;
    let task = &desk.task;
    support::report("original", &task.original, task)?;

    let config = support::scrub_config(0);
    let (model, trail) = scrub(task, &config)?;
    println!(
        "epoch  forget  retain  (max-epochs: 1..={})",
        config.max_steps
    );
    for c in trail.checkpoints() {
        println!(
            "{:>5}  {:>5.1}%  {:>5.1}%",
            c.epoch,
            100.0 * c.forget_error.unwrap_or(f64::NAN),
            100.0 * c.retain_error.unwrap_or(f64::NAN)
        );
    }
    support::report("scrub", &model, task)?;
    Ok(())
}
