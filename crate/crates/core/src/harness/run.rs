use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, MethodKind, MethodSpec, Suite};
use super::report::{ExperimentReport, ReportRow, AGGREGATES_FILE, ROWS_FILE, TIMINGS_FILE};
use crate::data::{
    build_matched_validation, inject_confusion, load_dataset, split_retain_forget, ConfusionSpec,
    LabeledDataset, MatchedValidation,
};
use crate::error::{Error, Result};
use crate::metrics::{
    confusion_matrix, fgt_err, ic_err, mia_score, scale_up_factor, ConfusionMatrix,
};
use crate::model::{evaluate_error, init_model, train, Architecture, ClassifierModel, TrainConfig};
use crate::unlearn::{self, UnlearningTask};

pub const SNAPSHOT_FILE: &str = "config.snapshot";
pub const CHECKPOINTS_DIR: &str = "checkpoints";

/// Length of the config-hash prefix used in run directory names.
const RUN_HASH_LEN: usize = 12;

/// A finished grid and where it was persisted.
#[derive(Clone, Debug)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub run_dir: PathBuf,
}

/// Everything a seed's cells share.
struct SeedContext {
    seed: u64,
    architecture: Architecture,
    init: ClassifierModel,
    task: UnlearningTask,
    /// Test examples from the forget set's classes, for the attack.
    attack_test: Option<LabeledDataset>,
}

/// Directory a config persists into: `<root>/run-<hash prefix>`.
pub fn run_dir(config: &ExperimentConfig) -> Result<PathBuf> {
    let hash = config.hash()?;
    Ok(config
        .output_root()
        .join(format!("run-{}", &hash[..RUN_HASH_LEN])))
}

fn prepare(config: &ExperimentConfig, seed: u64) -> Result<SeedContext> {
    let splits = load_dataset(&config.dataset, seed)?;
    let (train_set, retain, forget) = match (&config.forget, &config.confusion) {
        (Some(spec), _) => {
            let (retain, forget) = split_retain_forget(&splits.train, spec, seed)?;
            (splits.train.clone(), retain, forget)
        }
        (None, Some(spec)) => {
            let c = inject_confusion(&splits.train, spec, seed)?;
            (c.confused_train, c.retain, c.forget)
        }
        (None, None) => return Err(Error::InvalidConfig("no forget request".into())),
    };
    let (train_set, retain, matched) =
        match build_matched_validation(&splits.validation, &forget, &retain)? {
            MatchedValidation::Validation(m) => (train_set, retain, m),
            // Held-out retain examples must not be seen by the original either.
            MatchedValidation::RetainHoldout { matched, retain } => {
                (retain.union(&forget)?, retain, matched)
            }
        };
    let architecture = config
        .architecture
        .build(train_set.feature_dim(), train_set.num_classes())?;
    let init = init_model(architecture.clone(), seed)?;
    let original = train(
        &init,
        &train_set,
        &TrainConfig {
            seed,
            ..config.original.clone()
        },
    )?;
    let attack_test = config
        .suite
        .contains(&Suite::M3)
        .then(|| splits.test.restrict_to_classes(&forget.clean_label_set()));
    let task = UnlearningTask::new(original, retain, forget, matched, splits.test)?;
    Ok(SeedContext {
        seed,
        architecture,
        init,
        task,
        attack_test,
    })
}

fn seeded_train(spec: &MethodSpec, default: TrainConfig, seed: u64) -> TrainConfig {
    TrainConfig {
        seed,
        ..spec.train.clone().unwrap_or(default)
    }
}

/// Runs one method; returns the unlearned model, the rewind epoch and the
/// elapsed seconds.
fn run_method(
    spec: &MethodSpec,
    ctx: &SeedContext,
    config: &ExperimentConfig,
    checkpoint_dir: &Path,
) -> Result<(ClassifierModel, Option<usize>, f64)> {
    let seed = ctx.seed;
    let task = &ctx.task;
    let original_recipe = config.original.clone();
    let start = Instant::now();
    let mut rewound_to = None;
    let model = match spec.kind {
        MethodKind::Original => unlearn::original(task),
        MethodKind::Retrain => {
            unlearn::retrain(task, &ctx.init, &seeded_train(spec, original_recipe, seed))?
        }
        MethodKind::Finetune => {
            unlearn::finetune(task, &seeded_train(spec, TrainConfig::finetune(seed), seed))?
        }
        MethodKind::Neggrad => unlearn::neggrad(
            task,
            spec.beta.unwrap_or(1.0),
            &seeded_train(spec, TrainConfig::finetune(seed), seed),
        )?,
        MethodKind::CfK => unlearn::cf_k(
            task,
            spec.k.unwrap_or(0),
            &seeded_train(spec, TrainConfig::finetune(seed), seed),
        )?,
        MethodKind::EuK => unlearn::eu_k(
            task,
            spec.k.unwrap_or(0),
            ctx.init.weights(),
            &seeded_train(spec, original_recipe, seed),
        )?,
        MethodKind::Scrub => {
            let scrub_config = spec
                .scrub
                .clone()
                .map(|c| unlearn::ScrubConfig { seed, ..c })
                .ok_or_else(|| Error::InvalidConfig("scrub method without settings".into()))?;
            let (model, trail) = unlearn::scrub(task, &scrub_config)?;
            if spec.rewind {
                let outcome = unlearn::rewind(&trail, &model, task)?;
                rewound_to = outcome.rewound_to;
                let elapsed = start.elapsed().as_secs_f64();
                trail.save(checkpoint_dir, &ctx.architecture, seed)?;
                return Ok((outcome.model, rewound_to, elapsed));
            }
            model
        }
    };
    Ok((model, rewound_to, start.elapsed().as_secs_f64()))
}

fn pair_rate(matrix: &ConfusionMatrix, spec: &ConfusionSpec, count: u64) -> f64 {
    let population = matrix.row_sum(spec.class_a) + matrix.row_sum(spec.class_b);
    count as f64 / population as f64
}

fn evaluate(
    row: &mut ReportRow,
    model: &ClassifierModel,
    ctx: &SeedContext,
    config: &ExperimentConfig,
) -> Result<()> {
    let task = &ctx.task;
    if config.suite.contains(&Suite::M1) {
        row.retain_error = Some(evaluate_error(model, &task.retain)?);
        row.forget_error = Some(evaluate_error(model, &task.forget)?);
        row.test_error = Some(evaluate_error(model, &task.test)?);
    }
    if let (true, Some(spec)) = (config.suite.contains(&Suite::M2), &config.confusion) {
        let (a, b) = (spec.class_a, spec.class_b);
        let test = confusion_matrix(model, &task.test)?;
        let retain = confusion_matrix(model, &task.retain)?;
        let (ft, fr) = (fgt_err(&test, a, b)?, fgt_err(&retain, a, b)?);
        row.ic_test = Some(ic_err(&test, a, b)?);
        row.ic_retain = Some(ic_err(&retain, a, b)?);
        row.fgt_test = Some(ft);
        row.fgt_retain = Some(fr);
        row.fgt_test_rate = Some(pair_rate(&test, spec, ft));
        row.fgt_retain_rate = Some(pair_rate(&retain, spec, fr));
    }
    if let Some(attack_test) = &ctx.attack_test {
        let mia = mia_score(model, &task.forget, attack_test, ctx.seed)?;
        row.mia_mean = Some(mia.attack_accuracy_mean);
        row.mia_std = Some(mia.attack_accuracy_std);
    }
    Ok(())
}

fn failure(label: &str, seed: u64, e: &Error) -> ReportRow {
    ReportRow::failed(label, seed, e.code(), e.to_string())
}

fn run_cell(
    spec: &MethodSpec,
    ctx: &SeedContext,
    config: &ExperimentConfig,
    run_dir: &Path,
) -> ReportRow {
    let label = spec.label();
    let checkpoint_dir = run_dir
        .join(CHECKPOINTS_DIR)
        .join(&label)
        .join(ctx.seed.to_string());
    let attempt = catch_unwind(AssertUnwindSafe(|| -> Result<ReportRow> {
        let (model, rewound_to, seconds) = run_method(spec, ctx, config, &checkpoint_dir)?;
        let mut row = ReportRow::new(label.clone(), ctx.seed);
        row.rewound_to = rewound_to;
        row.wall_clock_seconds = Some(seconds);
        evaluate(&mut row, &model, ctx, config)?;
        Ok(row)
    }));
    match attempt {
        Ok(Ok(row)) => row,
        Ok(Err(e)) => failure(&label, ctx.seed, &e),
        Err(_) => ReportRow::failed(label, ctx.seed, "panic", "method panicked".into()),
    }
}

/// Fills `scale_up` for every successful unlearning row of a seed whose
/// first Retrain method succeeded. Original rows do no work and get none.
fn attach_scale_up(rows: &mut [ReportRow], config: &ExperimentConfig) {
    let Some(retrain_label) = config
        .methods
        .iter()
        .find(|m| m.kind == MethodKind::Retrain)
        .map(|m| m.label())
    else {
        return;
    };
    for &seed in &config.seeds {
        let retrain = rows
            .iter()
            .find(|r| r.seed == seed && r.method == retrain_label && r.is_ok())
            .and_then(|r| r.wall_clock_seconds);
        let Some(retrain) = retrain else { continue };
        let original: Vec<String> = config
            .methods
            .iter()
            .filter(|m| m.kind == MethodKind::Original)
            .map(|m| m.label())
            .collect();
        for r in rows
            .iter_mut()
            .filter(|r| r.seed == seed && r.is_ok() && !original.contains(&r.method))
        {
            r.scale_up = r
                .wall_clock_seconds
                .and_then(|t| scale_up_factor(retrain, t).ok());
        }
    }
}

/// Runs every (method, seed) cell and persists the results under
/// [`run_dir`]. Failing cells become error rows; the rest of the grid
/// continues. `jobs` bounds the worker threads; timings are only comparable
/// when `jobs` is 1.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentRun> {
    config.validate()?;
    let dir = run_dir(config)?;
    fs::create_dir_all(&dir)?;
    fs::write(dir.join(SNAPSHOT_FILE), config.to_toml()?)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start workers: {e}")))?;
    let rows = pool.install(|| {
        let contexts: Vec<(u64, Result<SeedContext>)> = config
            .seeds
            .par_iter()
            .map(|&seed| (seed, prepare(config, seed)))
            .collect();
        let cells: Vec<(&MethodSpec, &(u64, Result<SeedContext>))> = contexts
            .iter()
            .flat_map(|c| config.methods.iter().map(move |m| (m, c)))
            .collect();
        cells
            .par_iter()
            .map(|(spec, (seed, ctx))| match ctx {
                Ok(ctx) => run_cell(spec, ctx, config, &dir),
                Err(e) => failure(&spec.label(), *seed, e),
            })
            .collect::<Vec<_>>()
    });
    let mut rows = rows;
    attach_scale_up(&mut rows, config);
    let report = ExperimentReport::from_rows(config.hash()?, rows);
    fs::write(dir.join(ROWS_FILE), report.rows_csv()?)?;
    fs::write(dir.join(TIMINGS_FILE), report.timings_csv()?)?;
    fs::write(dir.join(AGGREGATES_FILE), report.aggregates_csv()?)?;
    Ok(ExperimentRun {
        report,
        run_dir: dir,
    })
}

/// Loads a persisted run: its config snapshot and report.
pub fn load_run(run_dir: &Path) -> Result<(ExperimentConfig, ExperimentReport)> {
    let config = ExperimentConfig::from_toml(&fs::read_to_string(run_dir.join(SNAPSHOT_FILE))?)?;
    let report = ExperimentReport::load(run_dir, config.hash()?)?;
    Ok((config, report))
}
