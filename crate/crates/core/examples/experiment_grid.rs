//! Runs a declarative experiment grid from a TOML config and writes every
//! report format. Defaults to the shipped selective-unlearning config.
//!
//! ```bash
//! cargo run --release -p scrub --example experiment_grid -- crates/core/configs/desk_confusion.toml
//! ```

use std::path::PathBuf;

use scrub::harness::{run_experiment, ExperimentConfig, ReportFormat};

fn main() -> scrub::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/desk_selective.toml")
        });
    let mut config = ExperimentConfig::load(&path)?;
    if config.output_dir.is_none() {
        config.output_dir = Some(std::env::temp_dir().join("scrub-grid-example"));
    }
    let run = run_experiment(&config, 1)?;
    print!("{}", run.report.to_table());
    for format in [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Plots] {
        for file in run.report.emit(format, &run.run_dir)? {
            println!("wrote {}", file.display());
        }
    }
    Ok(())
}
