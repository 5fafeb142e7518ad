//! Every baseline on the same selective task, with timings relative to
//! retraining from scratch.

mod support;

use std::time::Instant;

use scrub::unlearn::original;
use scrub::{cf_k, eu_k, finetune, neggrad, retrain, scale_up_factor, scrub, TrainConfig};

fn main() -> scrub::Result<()> {
    let desk = support::selective(0)?;
    let task = &desk.task;
    let recipe = support::original_recipe(0);
    let ft = TrainConfig::finetune(0);
    let ng = TrainConfig {
        weight_decay: 0.1,
        ..TrainConfig::finetune(0)
    };

    let timed = |f: &dyn Fn() -> scrub::Result<scrub::ClassifierModel>| {
        let start = Instant::now();
        f().map(|m| (m, start.elapsed().as_secs_f64()))
    };
    let (retrained, retrain_secs) = timed(&|| retrain(task, &desk.init, &recipe))?;
    let runs: Vec<(&str, scrub::ClassifierModel, f64)> = vec![
        ("original", original(task), 0.0),
        ("retrain", retrained, retrain_secs),
        {
            let (m, s) = timed(&|| finetune(task, &ft))?;
            ("finetune", m, s)
        },
        {
            let (m, s) = timed(&|| neggrad(task, 0.95, &ng))?;
            ("neggrad", m, s)
        },
        {
            let (m, s) = timed(&|| cf_k(task, 1, &ft))?;
            ("cf_k", m, s)
        },
        {
            let (m, s) = timed(&|| eu_k(task, 1, desk.init.weights(), &recipe))?;
            ("eu_k", m, s)
        },
        {
            let (m, s) = timed(&|| scrub(task, &support::scrub_config(0)).map(|(m, _)| m))?;
            ("scrub", m, s)
        },
    ];
    for (name, model, secs) in &runs {
        support::report(name, model, task)?;
        if let Ok(f) = scale_up_factor(retrain_secs, *secs) {
            println!("{:<10} {secs:.3}s, {f:.1}x faster than retraining", "");
        }
    }
    Ok(())
}
