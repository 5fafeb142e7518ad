//! One SVG bar chart per metric: method means with 95% confidence bars
//! (`1.96 * std / sqrt(n)`).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::report::{ExperimentReport, METRIC_COLUMNS, TIMING_COLUMNS};
use crate::error::Result;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_BOTTOM: f64 = 70.0;
const MARGIN_TOP: f64 = 40.0;

struct Bar<'a> {
    method: &'a str,
    mean: f64,
    half_width: f64,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn render(metric: &str, bars: &[Bar<'_>]) -> String {
    let top = bars
        .iter()
        .map(|b| b.mean + b.half_width)
        .fold(0.0f64, f64::max)
        .max(1e-12)
        * 1.1;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let plot_w = WIDTH - MARGIN_LEFT - 20.0;
    let y = |v: f64| MARGIN_TOP + plot_h * (1.0 - v.max(0.0) / top);
    let slot = plot_w / bars.len() as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{} (mean, 95% CI)</text>"#,
        WIDTH / 2.0,
        escape(metric)
    );
    let base = y(0.0);
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#,
        WIDTH - 20.0
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{base}" stroke="black"/>"#
    );
    for tick in 0..=4 {
        let v = top * tick as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            MARGIN_LEFT - 6.0,
            y(v) + 4.0,
            v
        );
    }
    for (i, b) in bars.iter().enumerate() {
        let cx = MARGIN_LEFT + slot * (i as f64 + 0.5);
        let bw = slot * 0.6;
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#4c72b0"/>"##,
            cx - bw / 2.0,
            y(b.mean),
            bw,
            base - y(b.mean)
        );
        if b.half_width > 0.0 {
            let (lo, hi) = (y(b.mean - b.half_width), y(b.mean + b.half_width));
            let _ = writeln!(
                s,
                r#"<path d="M{cx:.1} {lo:.1} V{hi:.1} M{:.1} {lo:.1} H{:.1} M{:.1} {hi:.1} H{:.1}" stroke="black"/>"#,
                cx - 6.0,
                cx + 6.0,
                cx - 6.0,
                cx + 6.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            base + 18.0,
            escape(b.method)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<metric>.svg` for every metric present in the aggregates.
pub(crate) fn write_plots(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for &metric in METRIC_COLUMNS.iter().chain(TIMING_COLUMNS) {
        let bars: Vec<Bar<'_>> = report
            .aggregates
            .iter()
            .filter_map(|a| {
                a.get(metric).map(|m| Bar {
                    method: &a.method,
                    mean: m.mean,
                    half_width: 1.96 * m.std / (m.n as f64).sqrt(),
                })
            })
            .collect();
        if bars.is_empty() {
            continue;
        }
        let path = dir.join(format!("{metric}.svg"));
        fs::write(&path, render(metric, &bars))?;
        written.push(path);
    }
    Ok(written)
}
