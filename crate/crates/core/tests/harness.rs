use std::path::Path;
use std::process::Command;

use scrub::harness::{
    load_run, run_experiment, ExperimentConfig, ReportFormat, AGGREGATES_FILE, JSON_FILE,
    ROWS_FILE, TABLE_FILE, TIMINGS_FILE,
};

const BASE: &str = r#"
name = "tiny"
seeds = [0]
suite = ["M1"]

[dataset]
kind = "blobs"
num_classes = 3
feature_dim = 4
train_per_class = 20
validation_per_class = 5
test_per_class = 10
center_scale = 2.0

[architecture]
kind = "mlp"
hidden = [8]

[original]
epochs = 5
learning_rate = 0.05
batch_size = 16

[forget]
mode = "selective"
target_class = 1
count = 5
"#;

fn config(extra: &str, out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::from_toml(&format!("{BASE}\n{extra}")).unwrap();
    c.output_dir = Some(out.to_path_buf());
    c
}

const ORIGINAL: &str = "[[methods]]\nkind = \"original\"\n";
const FINETUNE: &str = "[[methods]]\nkind = \"finetune\"\n";

/// NegGrad with pure gradient ascent at a huge learning rate overflows.
const DIVERGING: &str = r#"
[[methods]]
kind = "neggrad"
name = "exploding"
beta = 0.0
[methods.train]
epochs = 200
learning_rate = 50.0
batch_size = 4
"#;

#[test]
fn minimal_grid_reports_only_requested_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_experiment(&config(ORIGINAL, dir.path()), 1).unwrap();
    assert_eq!(run.report.rows.len(), 1);
    let row = &run.report.rows[0];
    assert!(row.is_ok());
    assert!(row.retain_error.is_some() && row.forget_error.is_some() && row.test_error.is_some());
    assert!(row.ic_test.is_none() && row.fgt_test.is_none() && row.mia_mean.is_none());
    assert_eq!(
        row.forget_error.unwrap(),
        row.forget_error.unwrap().clamp(0.0, 1.0)
    );
    let header = std::fs::read_to_string(run.run_dir.join(ROWS_FILE)).unwrap();
    assert!(header.starts_with("method,seed,status,"));
}

#[test]
fn grid_has_one_row_per_cell_and_one_aggregate_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(&format!("{ORIGINAL}{FINETUNE}"), dir.path());
    c.seeds = vec![0, 1, 2];
    let run = run_experiment(&c, 2).unwrap();
    assert_eq!(run.report.rows.len(), 6);
    assert_eq!(run.report.aggregates.len(), 2);
    for a in &run.report.aggregates {
        assert_eq!(a.ok_rows, 3);
        assert_eq!(a.get("test_error").unwrap().n, 3);
    }
    for file in [ROWS_FILE, TIMINGS_FILE, AGGREGATES_FILE] {
        assert!(run.run_dir.join(file).is_file(), "{file} missing");
    }
    for r in &run.report.rows {
        assert!(c.seeds.contains(&r.seed));
        assert!(c.methods.iter().any(|m| m.label() == r.method));
        assert!(r.wall_clock_seconds.unwrap() > 0.0);
    }

    // Aggregates match a recomputation from the persisted rows.
    let persisted = std::fs::read_to_string(run.run_dir.join(ROWS_FILE)).unwrap();
    let mut reader = csv::Reader::from_reader(persisted.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    for a in &run.report.aggregates {
        let values: Vec<f64> = records
            .iter()
            .filter(|r| &r[col("method")] == a.method.as_str())
            .map(|r| r[col("forget_error")].parse().unwrap())
            .collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        assert!((a.get("forget_error").unwrap().mean - mean).abs() <= 1e-12);
    }
    let name = run.run_dir.file_name().unwrap().to_str().unwrap();
    assert_eq!(name, format!("run-{}", &c.hash().unwrap()[..12]));
}

#[test]
fn failing_cell_does_not_stop_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_experiment(
        &config(&format!("{ORIGINAL}{DIVERGING}{FINETUNE}"), dir.path()),
        1,
    )
    .unwrap();
    assert_eq!(run.report.rows.len(), 3);
    let bad = run
        .report
        .rows
        .iter()
        .find(|r| r.method == "exploding")
        .unwrap();
    assert!(!bad.is_ok());
    assert_eq!(bad.status, "diverged");
    assert!(bad.error.is_some() && bad.test_error.is_none());
    assert!(run
        .report
        .rows
        .iter()
        .filter(|r| r.method != "exploding")
        .all(|r| r.is_ok()));
    assert!(run.report.has_failures());
    let agg = run.report.aggregate("exploding").unwrap();
    assert_eq!((agg.ok_rows, agg.failed_rows), (0, 1));
}

#[test]
fn persisted_run_reloads_and_renders_every_format() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(&format!("{ORIGINAL}{FINETUNE}"), dir.path());
    let run = run_experiment(&c, 1).unwrap();
    let (loaded_config, report) = load_run(&run.run_dir).unwrap();
    assert_eq!(loaded_config.hash().unwrap(), c.hash().unwrap());
    assert_eq!(report.rows_csv().unwrap(), run.report.rows_csv().unwrap());
    assert_eq!(
        report.rows[0].wall_clock_seconds,
        run.report.rows[0].wall_clock_seconds
    );
    for format in [
        ReportFormat::Table,
        ReportFormat::Csv,
        ReportFormat::Json,
        ReportFormat::Plots,
    ] {
        assert!(!report.emit(format, &run.run_dir).unwrap().is_empty());
    }
    for file in [TABLE_FILE, JSON_FILE] {
        assert!(run.run_dir.join(file).is_file());
    }
    assert!(run.run_dir.join("plots").join("test_error.svg").is_file());
}

#[test]
fn invalid_configs_are_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(ORIGINAL, dir.path());
    c.seeds = vec![1, 1];
    assert!(run_experiment(&c, 1).is_err());
    assert!(
        ExperimentConfig::from_toml(&format!("{BASE}\n[[methods]]\nkind = \"cf_k\"\n")).is_err()
    );
    assert!(ExperimentConfig::from_toml(&format!("{BASE}\nbogus = 1\n{ORIGINAL}")).is_err());
}

fn cli(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_scrub"))
        .args(args)
        .env("SCRUB_OUTPUT_ROOT", out)
        .output()
        .unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, format!("{BASE}\n{ORIGINAL}{FINETUNE}")).unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, format!("{BASE}\n{ORIGINAL}{DIVERGING}")).unwrap();
    let out = dir.path().join("runs");

    let ok = cli(&["run", good.to_str().unwrap(), "--seeds", "3,4"], &out);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    let stdout = String::from_utf8(ok.stdout).unwrap();
    let run_dir = stdout
        .lines()
        .find_map(|l| l.strip_prefix("results: "))
        .unwrap();
    assert!(Path::new(run_dir).starts_with(&out));

    let json = cli(&["report", run_dir, "--format", "json"], &out);
    assert_eq!(json.status.code(), Some(0));
    assert!(Path::new(run_dir).join(JSON_FILE).is_file());

    let only = cli(
        &[
            "run",
            good.to_str().unwrap(),
            "--methods",
            "finetune",
            "--out",
            dir.path().join("alt").to_str().unwrap(),
        ],
        &out,
    );
    assert_eq!(only.status.code(), Some(0));
    assert!(!String::from_utf8(only.stdout).unwrap().contains("original"));

    let failed = cli(&["run", bad.to_str().unwrap()], &out);
    assert_eq!(failed.status.code(), Some(1));

    let missing = cli(
        &["run", dir.path().join("nope.toml").to_str().unwrap()],
        &out,
    );
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8(missing.stderr)
        .unwrap()
        .starts_with("error [io]"));

    let unknown = cli(&["run", good.to_str().unwrap(), "--methods", "nope"], &out);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn shipped_configs_parse_and_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ExperimentConfig::load(&path).unwrap().validate().unwrap();
            n += 1;
        }
    }
    assert!(n >= 2);
}
