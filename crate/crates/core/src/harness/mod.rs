//! Declarative experiment grids.
//!
//! An [`ExperimentConfig`] (TOML) names a dataset, an architecture, a forget
//! or label-confusion request, a list of methods and a list of seeds.
//! [`run_experiment`] trains the original model per seed, runs every method,
//! evaluates the selected suites and persists the results:
//!
//! ```text
//! <output root>/run-<config hash prefix>/
//!     config.snapshot        the resolved config (TOML)
//!     rows.csv               one row per (method, seed); reproducible
//!     aggregates.csv         per-method mean and std; reproducible
//!     timings.csv            wall-clock seconds and scale-up per row
//!     checkpoints/<method>/<seed>/   per-epoch trails of rewinding methods
//! ```
//!
//! The output root is the config's `output_dir`, else `$SCRUB_OUTPUT_ROOT`,
//! else `runs`.

mod config;
mod plots;
mod report;
mod run;

pub use config::{
    ArchitectureSpec, ExperimentConfig, MethodKind, MethodSpec, Suite, OUTPUT_ROOT_ENV,
};
pub use report::{
    emit_report, AggregateRow, ExperimentReport, MetricSummary, ReportFormat, ReportRow,
    AGGREGATES_FILE, JSON_FILE, METRIC_COLUMNS, PLOTS_DIR, ROWS_FILE, STATUS_OK, TABLE_FILE,
    TIMINGS_FILE, TIMING_COLUMNS, TOOL_NAME, TOOL_VERSION,
};
pub use run::{load_run, run_dir, run_experiment, ExperimentRun, CHECKPOINTS_DIR, SNAPSHOT_FILE};
