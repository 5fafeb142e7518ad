//! SCRUB+R: an aggressive SCRUB run pushes the forget error past the error
//! the final model shows on held-out data of the same classes, and
//! rewinding picks the checkpoint closest to that held-out error.

mod support;

use scrub::{evaluate_error, rewind, scrub, ScrubConfig};

fn main() -> scrub::Result<()> {
    let desk = support::selective(0)?;
    let task = &desk.task;
    let config = ScrubConfig {
        learning_rate: 0.02,
        ..support::scrub_config(0)
    };
    let (model, trail) = scrub(task, &config)?;
    for c in trail.checkpoints() {
        println!(
            "epoch {:>2}: forget error {:>5.1}%",
            c.epoch,
            100.0 * c.forget_error.unwrap_or(f64::NAN)
        );
    }

    let outcome = rewind(&trail, &model, task)?;
    println!(
        "reference (final model's error on matched validation): {:.1}%",
        100.0 * outcome.reference
    );
    match outcome.rewound_to {
        Some(epoch) => println!("rewound to epoch {epoch}"),
        None => println!("final model kept: its forget error is already at or below the reference"),
    }
    println!(
        "forget error: final {:.1}%, selected {:.1}%",
        100.0 * evaluate_error(&model, &task.forget)?,
        100.0 * evaluate_error(&outcome.model, &task.forget)?
    );
    support::report("scrub+r", &outcome.model, task)?;

    let dir = std::env::temp_dir().join("scrub-rewind-example");
    trail.save(&dir, model.architecture(), 0)?;
    println!("trail saved under {}", dir.display());
    Ok(())
}
