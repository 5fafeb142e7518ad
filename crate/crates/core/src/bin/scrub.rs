//! Command-line front end for experiment grids.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scrub::harness::{load_run, run_experiment, ExperimentConfig, ReportFormat, Suite};

#[derive(Parser)]
#[command(
    name = "scrub",
    version,
    about = "Run and report machine-unlearning experiment grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (method, seed) cell of a config and persist the results.
    Run {
        config: PathBuf,
        /// Override the config's seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Run only these methods (by name).
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        /// Output root; defaults to the config's `output_dir`, then $SCRUB_OUTPUT_ROOT.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the metric suites, e.g. `M1,M3`.
        #[arg(long, value_delimiter = ',')]
        suite: Vec<Suite>,
        /// Worker threads. Timings and scale-up are only meaningful with 1.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Render a persisted run.
    Report {
        run_dir: PathBuf,
        #[arg(long, default_value = "table")]
        format: ReportFormat,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> scrub::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            seeds,
            methods,
            out,
            suite,
            jobs,
        } => {
            let mut config = ExperimentConfig::load(&config)?;
            if !seeds.is_empty() {
                config.seeds = seeds;
            }
            if !methods.is_empty() {
                config.select_methods(&methods)?;
            }
            if !suite.is_empty() {
                config.suite = suite.into_iter().collect();
            }
            if out.is_some() {
                config.output_dir = out;
            }
            config.validate()?;
            let run = run_experiment(&config, jobs)?;
            print!("{}", run.report.to_table());
            println!("results: {}", run.run_dir.display());
            Ok(exit_status(run.report.has_failures()))
        }
        Command::Report { run_dir, format } => {
            let (_, report) = load_run(&run_dir)?;
            let files = report.emit(format, &run_dir)?;
            if format == ReportFormat::Table {
                print!("{}", report.to_table());
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(exit_status(report.has_failures()))
        }
    }
}

fn exit_status(failed: bool) -> ExitCode {
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
