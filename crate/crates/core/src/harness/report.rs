use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::plots;
use crate::error::{Error, Result};
use crate::metrics::mean_std;

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const ROWS_FILE: &str = "rows.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const AGGREGATES_FILE: &str = "aggregates.csv";
pub const JSON_FILE: &str = "report.json";
pub const TABLE_FILE: &str = "report.txt";
pub const PLOTS_DIR: &str = "plots";

/// Status of a row whose method ran to completion.
pub const STATUS_OK: &str = "ok";

/// Numeric columns of a row, in schema order. Fgt counts are raw counts;
/// the `_rate` columns divide them by the two confused classes' population.
pub const METRIC_COLUMNS: &[&str] = &[
    "retain_error",
    "forget_error",
    "test_error",
    "ic_test",
    "ic_retain",
    "fgt_test",
    "fgt_retain",
    "fgt_test_rate",
    "fgt_retain_rate",
    "mia_mean",
    "mia_std",
];

/// Columns that depend on wall-clock time and are kept out of the
/// reproducible files.
pub const TIMING_COLUMNS: &[&str] = &["wall_clock_seconds", "scale_up"];

/// One (method, seed) cell of the grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub seed: u64,
    /// `ok`, or the error code of the failure.
    pub status: String,
    pub retain_error: Option<f64>,
    pub forget_error: Option<f64>,
    pub test_error: Option<f64>,
    pub ic_test: Option<f64>,
    pub ic_retain: Option<f64>,
    pub fgt_test: Option<u64>,
    pub fgt_retain: Option<u64>,
    pub fgt_test_rate: Option<f64>,
    pub fgt_retain_rate: Option<f64>,
    pub mia_mean: Option<f64>,
    pub mia_std: Option<f64>,
    /// Epoch chosen by rewinding; empty when the final model was kept.
    pub rewound_to: Option<usize>,
    pub error: Option<String>,
    #[serde(skip)]
    pub wall_clock_seconds: Option<f64>,
    #[serde(skip)]
    pub scale_up: Option<f64>,
}

impl ReportRow {
    pub fn new(method: impl Into<String>, seed: u64) -> Self {
        Self {
            method: method.into(),
            seed,
            status: STATUS_OK.into(),
            ..Self::default()
        }
    }

    pub fn failed(method: impl Into<String>, seed: u64, code: &str, message: String) -> Self {
        Self {
            status: code.into(),
            error: Some(message),
            ..Self::new(method, seed)
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }

    /// Value of a metric or timing column by name.
    pub fn value(&self, column: &str) -> Option<f64> {
        match column {
            "retain_error" => self.retain_error,
            "forget_error" => self.forget_error,
            "test_error" => self.test_error,
            "ic_test" => self.ic_test,
            "ic_retain" => self.ic_retain,
            "fgt_test" => self.fgt_test.map(|v| v as f64),
            "fgt_retain" => self.fgt_retain.map(|v| v as f64),
            "fgt_test_rate" => self.fgt_test_rate,
            "fgt_retain_rate" => self.fgt_retain_rate,
            "mia_mean" => self.mia_mean,
            "mia_std" => self.mia_std,
            "wall_clock_seconds" => self.wall_clock_seconds,
            "scale_up" => self.scale_up,
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    /// Number of successful rows carrying this metric.
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

/// Mean and standard deviation of every metric over one method's
/// successful rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: String,
    pub ok_rows: usize,
    pub failed_rows: usize,
    pub metrics: Vec<MetricSummary>,
}

impl AggregateRow {
    pub fn get(&self, metric: &str) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.metric == metric)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub config_hash: String,
    /// Sorted by method name, then seed.
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<AggregateRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Csv,
    Json,
    Plots,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "plots" => Ok(ReportFormat::Plots),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format `{other}`"
            ))),
        }
    }
}

fn aggregate(rows: &[ReportRow]) -> Vec<AggregateRow> {
    let mut methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
    methods.dedup();
    methods
        .into_iter()
        .map(|method| {
            let group: Vec<&ReportRow> = rows.iter().filter(|r| r.method == method).collect();
            let ok: Vec<&&ReportRow> = group.iter().filter(|r| r.is_ok()).collect();
            let metrics = METRIC_COLUMNS
                .iter()
                .chain(TIMING_COLUMNS)
                .filter_map(|&col| {
                    let values: Vec<f64> = ok.iter().filter_map(|r| r.value(col)).collect();
                    if values.is_empty() {
                        return None;
                    }
                    let (mean, std) = mean_std(&values);
                    Some(MetricSummary {
                        metric: col.to_string(),
                        n: values.len(),
                        mean,
                        std,
                    })
                })
                .collect();
            AggregateRow {
                method: method.to_string(),
                ok_rows: ok.len(),
                failed_rows: group.len() - ok.len(),
                metrics,
            }
        })
        .collect()
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, |v| v.to_string())
}

fn parse_opt<T: std::str::FromStr>(field: &str, column: &str) -> Result<Option<T>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| Error::Serialization(format!("bad value `{field}` in column {column}")))
}

const ROW_HEADER: &[&str] = &[
    "method",
    "seed",
    "status",
    "retain_error",
    "forget_error",
    "test_error",
    "ic_test",
    "ic_retain",
    "fgt_test",
    "fgt_retain",
    "fgt_test_rate",
    "fgt_retain_rate",
    "mia_mean",
    "mia_std",
    "rewound_to",
    "error",
];

impl ExperimentReport {
    /// Sorts rows and computes aggregates.
    pub fn from_rows(config_hash: String, mut rows: Vec<ReportRow>) -> Self {
        rows.sort_by(|a, b| a.method.cmp(&b.method).then(a.seed.cmp(&b.seed)));
        let aggregates = aggregate(&rows);
        Self {
            config_hash,
            rows,
            aggregates,
        }
    }

    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(|r| !r.is_ok())
    }

    pub fn aggregate(&self, method: &str) -> Option<&AggregateRow> {
        self.aggregates.iter().find(|a| a.method == method)
    }

    pub fn rows_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }

    /// Reproducible per-row results.
    pub fn rows_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(ROW_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.method.clone(),
                r.seed.to_string(),
                r.status.clone(),
                fmt_opt(&r.retain_error),
                fmt_opt(&r.forget_error),
                fmt_opt(&r.test_error),
                fmt_opt(&r.ic_test),
                fmt_opt(&r.ic_retain),
                fmt_opt(&r.fgt_test),
                fmt_opt(&r.fgt_retain),
                fmt_opt(&r.fgt_test_rate),
                fmt_opt(&r.fgt_retain_rate),
                fmt_opt(&r.mia_mean),
                fmt_opt(&r.mia_std),
                fmt_opt(&r.rewound_to),
                fmt_opt(&r.error),
            ])?;
        }
        finish(w)
    }

    /// Wall-clock time and scale-up per row.
    pub fn timings_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["method", "seed", "wall_clock_seconds", "scale_up"])?;
        for r in &self.rows {
            w.write_record([
                r.method.clone(),
                r.seed.to_string(),
                fmt_opt(&r.wall_clock_seconds),
                fmt_opt(&r.scale_up),
            ])?;
        }
        finish(w)
    }

    /// Per-method mean and standard deviation of the reproducible metrics.
    pub fn aggregates_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["method", "metric", "n", "mean", "std"])?;
        for a in &self.aggregates {
            for m in a
                .metrics
                .iter()
                .filter(|m| !TIMING_COLUMNS.contains(&m.metric.as_str()))
            {
                w.write_record([
                    a.method.clone(),
                    m.metric.clone(),
                    m.n.to_string(),
                    m.mean.to_string(),
                    m.std.to_string(),
                ])?;
            }
        }
        finish(w)
    }

    /// Rebuilds a report from [`Self::rows_csv`] and optionally
    /// [`Self::timings_csv`] output.
    pub fn from_csv(
        config_hash: String,
        rows_csv: &str,
        timings_csv: Option<&str>,
    ) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(rows_csv.as_bytes());
        let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
        if header != ROW_HEADER {
            return Err(Error::Serialization(format!(
                "unexpected rows header {header:?}"
            )));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let rec = record?;
            let f = |i: usize| rec.get(i).unwrap_or("");
            rows.push(ReportRow {
                method: f(0).to_string(),
                seed: parse_opt(f(1), "seed")?
                    .ok_or_else(|| Error::Serialization("missing seed".into()))?,
                status: f(2).to_string(),
                retain_error: parse_opt(f(3), ROW_HEADER[3])?,
                forget_error: parse_opt(f(4), ROW_HEADER[4])?,
                test_error: parse_opt(f(5), ROW_HEADER[5])?,
                ic_test: parse_opt(f(6), ROW_HEADER[6])?,
                ic_retain: parse_opt(f(7), ROW_HEADER[7])?,
                fgt_test: parse_opt(f(8), ROW_HEADER[8])?,
                fgt_retain: parse_opt(f(9), ROW_HEADER[9])?,
                fgt_test_rate: parse_opt(f(10), ROW_HEADER[10])?,
                fgt_retain_rate: parse_opt(f(11), ROW_HEADER[11])?,
                mia_mean: parse_opt(f(12), ROW_HEADER[12])?,
                mia_std: parse_opt(f(13), ROW_HEADER[13])?,
                rewound_to: parse_opt(f(14), ROW_HEADER[14])?,
                error: parse_opt(f(15), ROW_HEADER[15])?,
                wall_clock_seconds: None,
                scale_up: None,
            });
        }
        if let Some(t) = timings_csv {
            let mut reader = csv::Reader::from_reader(t.as_bytes());
            for record in reader.records() {
                let rec = record?;
                let method = rec.get(0).unwrap_or("");
                let seed: u64 = parse_opt(rec.get(1).unwrap_or(""), "seed")?.unwrap_or(u64::MAX);
                let row = rows
                    .iter_mut()
                    .find(|r| r.method == method && r.seed == seed)
                    .ok_or_else(|| {
                        Error::Serialization(format!("timing for unknown row {method}/{seed}"))
                    })?;
                row.wall_clock_seconds = parse_opt(rec.get(2).unwrap_or(""), "wall_clock_seconds")?;
                row.scale_up = parse_opt(rec.get(3).unwrap_or(""), "scale_up")?;
            }
        }
        Ok(Self::from_rows(config_hash, rows))
    }

    /// Reproducible JSON: metadata, rows and aggregates without timings.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            tool: &'a str,
            version: &'a str,
            config_hash: &'a str,
            rows: &'a [ReportRow],
            aggregates: Vec<AggregateRow>,
        }
        let aggregates = self
            .aggregates
            .iter()
            .map(|a| AggregateRow {
                metrics: a
                    .metrics
                    .iter()
                    .filter(|m| !TIMING_COLUMNS.contains(&m.metric.as_str()))
                    .cloned()
                    .collect(),
                ..a.clone()
            })
            .collect();
        let doc = Doc {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            config_hash: &self.config_hash,
            rows: &self.rows,
            aggregates,
        };
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    /// Fixed-width table: one line per row, then one `mean±std` line per
    /// method. Columns follow [`METRIC_COLUMNS`] then [`TIMING_COLUMNS`],
    /// skipping columns that are empty everywhere.
    pub fn to_table(&self) -> String {
        let columns: Vec<&str> = METRIC_COLUMNS
            .iter()
            .chain(TIMING_COLUMNS)
            .copied()
            .filter(|c| self.rows.iter().any(|r| r.value(c).is_some()))
            .collect();
        let mut header = vec!["method".to_string(), "seed".into(), "status".into()];
        header.extend(columns.iter().map(|c| c.to_string()));
        let mut lines = vec![header];
        for r in &self.rows {
            let mut line = vec![r.method.clone(), r.seed.to_string(), r.status.clone()];
            line.extend(
                columns
                    .iter()
                    .map(|c| r.value(c).map_or("-".into(), |v| format!("{v:.4}"))),
            );
            lines.push(line);
        }
        for a in &self.aggregates {
            let mut line = vec![
                a.method.clone(),
                "mean±std".into(),
                format!("{}/{} ok", a.ok_rows, a.ok_rows + a.failed_rows),
            ];
            line.extend(columns.iter().map(|c| {
                a.get(c)
                    .map_or("-".into(), |m| format!("{:.4}±{:.4}", m.mean, m.std))
            }));
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|i| {
                lines
                    .iter()
                    .map(|l| l[i].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        for l in &lines {
            let cells: Vec<String> = l
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }

    /// Writes the chosen format into `dir` and returns the files written.
    pub fn emit(&self, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
        if self.rows.is_empty() {
            return Err(Error::EmptyDataset("report has no rows".into()));
        }
        fs::create_dir_all(dir)?;
        let write = |name: &str, text: String| -> Result<PathBuf> {
            let path = dir.join(name);
            fs::write(&path, text)?;
            Ok(path)
        };
        match format {
            ReportFormat::Table => Ok(vec![write(TABLE_FILE, self.to_table())?]),
            ReportFormat::Csv => Ok(vec![
                write(ROWS_FILE, self.rows_csv()?)?,
                write(TIMINGS_FILE, self.timings_csv()?)?,
                write(AGGREGATES_FILE, self.aggregates_csv()?)?,
            ]),
            ReportFormat::Json => Ok(vec![write(JSON_FILE, self.to_json()?)?]),
            ReportFormat::Plots => plots::write_plots(self, &dir.join(PLOTS_DIR)),
        }
    }

    /// Loads the report persisted in a run directory.
    pub fn load(run_dir: &Path, config_hash: String) -> Result<Self> {
        let rows = fs::read_to_string(run_dir.join(ROWS_FILE))?;
        let timings = fs::read_to_string(run_dir.join(TIMINGS_FILE)).ok();
        Self::from_csv(config_hash, &rows, timings.as_deref())
    }
}

/// Writes `report` in `format` into `dir`.
pub fn emit_report(
    report: &ExperimentReport,
    format: ReportFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    report.emit(format, dir)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> ExperimentReport {
        let mut rows = Vec::new();
        for seed in [2, 0, 1] {
            for method in ["scrub", "original"] {
                let mut r = ReportRow::new(method, seed);
                r.retain_error = Some(0.01 * seed as f64);
                r.forget_error = Some(0.1 + 0.1 * seed as f64 / 3.0);
                r.fgt_test = Some(seed * 2);
                r.mia_mean = Some(0.5);
                r.wall_clock_seconds = Some(1.5 + seed as f64);
                r.scale_up = (method == "scrub").then_some(2.0);
                rows.push(r);
            }
        }
        rows.push(ReportRow::failed(
            "neggrad",
            0,
            "diverged",
            "loss, \"nan\"".into(),
        ));
        ExperimentReport::from_rows("abc".into(), rows)
    }

    #[test]
    fn sorted_and_aggregated() {
        let r = sample();
        let keys: Vec<_> = r.rows.iter().map(|r| (r.method.as_str(), r.seed)).collect();
        assert_eq!(keys[0], ("neggrad", 0));
        assert_eq!(
            keys[1..4],
            [("original", 0), ("original", 1), ("original", 2)]
        );
        assert_eq!(r.aggregates.len(), 3);
        let agg = r.aggregate("scrub").unwrap();
        let fe = agg.get("forget_error").unwrap();
        let by_hand = r
            .rows_for("scrub")
            .map(|r| r.forget_error.unwrap())
            .sum::<f64>()
            / 3.0;
        assert!((fe.mean - by_hand).abs() < 1e-15);
        assert_eq!(r.aggregate("neggrad").unwrap().failed_rows, 1);
        assert!(r.has_failures());
    }

    #[test]
    fn csv_round_trip() {
        let r = sample();
        let back = ExperimentReport::from_csv(
            "abc".into(),
            &r.rows_csv().unwrap(),
            Some(&r.timings_csv().unwrap()),
        )
        .unwrap();
        assert_eq!(back, r);
        let no_timing =
            ExperimentReport::from_csv("abc".into(), &r.rows_csv().unwrap(), None).unwrap();
        assert_eq!(no_timing.rows_csv().unwrap(), r.rows_csv().unwrap());
    }

    #[test]
    fn json_has_metadata_and_no_timings() {
        let json = sample().to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["config_hash"], "abc");
        assert_eq!(v["version"], TOOL_VERSION);
        assert!(!json.contains("wall_clock"));
        assert!(!json.contains("scale_up"));
    }

    #[test]
    fn table_columns_follow_schema() {
        let t = sample().to_table();
        let header: Vec<&str> = t.lines().next().unwrap().split_whitespace().collect();
        assert_eq!(
            header,
            [
                "method",
                "seed",
                "status",
                "retain_error",
                "forget_error",
                "fgt_test",
                "mia_mean",
                "wall_clock_seconds",
                "scale_up"
            ]
        );
        assert_eq!(t.lines().count(), 1 + 7 + 3);
    }

    #[test]
    fn emit_all_formats() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample();
        for f in ["table", "csv", "json", "plots"] {
            let files = r.emit(f.parse().unwrap(), dir.path()).unwrap();
            assert!(files.iter().all(|p| p.exists()), "{f}");
        }
        assert_eq!(ExperimentReport::load(dir.path(), "abc".into()).unwrap(), r);
        let empty = ExperimentReport::from_rows("x".into(), vec![]);
        assert!(empty.emit(ReportFormat::Csv, dir.path()).is_err());
    }
}
