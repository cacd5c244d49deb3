//! File formats: feature and curve CSV, matching and truth JSON, experiment
//! tables, and SVG plots.
//!
//! CSV files use `,` separators and `.` decimals; lines starting with `#` are
//! ignored. Floats are written with Rust's shortest round-trip formatting, so
//! every value reads back bit-for-bit.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};
use crate::flow::LssCurve;
use crate::select::{SelectionOutcome, StepDiagnostic};
use crate::synth::{
    ExperimentTable, METRIC_EXACT_RECOVERY, METRIC_K_HAT, METRIC_PRECISION, METRIC_SIGMA_BAR_SQ,
    METRIC_SUBSET_RECOVERY,
};
use crate::types::{FeatureSet, GroundTruth, PartialMatching};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

/// Numeric rows of a CSV stream with their 1-based line numbers.
///
/// A first row in which no cell parses as a number is taken as a header and
/// skipped. `label` names the source in error messages.
fn read_numeric_rows<R: Read>(input: R, label: &Path) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut rows: Vec<(u64, Vec<f64>)> = Vec::new();
    let mut first = true;
    for record in csv_reader(input).records() {
        let record = record.map_err(|source| ParseError::Csv {
            path: label.to_path_buf(),
            source,
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if first {
            first = false;
            if record.iter().all(|cell| cell.parse::<f64>().is_err()) {
                continue;
            }
        }
        let mut values = Vec::with_capacity(record.len());
        for (column, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| ParseError::NonNumeric {
                path: label.to_path_buf(),
                line,
                column: column + 1,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(ParseError::NonFinite {
                    path: label.to_path_buf(),
                    line,
                    column: column + 1,
                }
                .into());
            }
            values.push(v);
        }
        if let Some((_, head)) = rows.first() {
            if head.len() != values.len() {
                return Err(ParseError::Ragged {
                    path: label.to_path_buf(),
                    line,
                    expected: head.len(),
                    found: values.len(),
                }
                .into());
            }
        }
        rows.push((line, values));
    }
    if rows.is_empty() {
        return Err(ParseError::Empty {
            path: label.to_path_buf(),
        }
        .into());
    }
    Ok(rows)
}

/// Reads one feature vector per non-comment row.
pub fn load_feature_csv(path: impl AsRef<Path>) -> Result<FeatureSet> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(io_err(path))?;
    read_feature_csv(file, path)
}

/// Like [`load_feature_csv`], from any reader; `label` appears in errors.
pub fn read_feature_csv<R: Read>(input: R, label: impl AsRef<Path>) -> Result<FeatureSet> {
    let rows = read_numeric_rows(input, label.as_ref())?;
    FeatureSet::new(rows.into_iter().map(|(_, v)| v).collect())
}

pub fn feature_csv(fs: &FeatureSet) -> String {
    let mut out = String::new();
    for v in fs.iter() {
        for (c, x) in v.iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            write!(out, "{x}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_feature_csv(fs: &FeatureSet, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &feature_csv(fs))
}

/// `k,phi` rows for `k = 0..=k_max`.
pub fn curve_csv(curve: &LssCurve) -> String {
    let mut out = String::from("k,phi\n");
    for (k, phi) in curve.phi_values().iter().enumerate() {
        writeln!(out, "{k},{phi}").unwrap();
    }
    out
}

pub fn write_curve_csv(curve: &LssCurve, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &curve_csv(curve))
}

/// Reads `phi(0), phi(1), ...` back from a `k,phi` file.
pub fn load_curve_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(io_err(path))?;
    read_curve_csv(file, path)
}

pub fn read_curve_csv<R: Read>(input: R, label: impl AsRef<Path>) -> Result<Vec<f64>> {
    let label = label.as_ref();
    let rows = read_numeric_rows(input, label)?;
    let mut phi = Vec::with_capacity(rows.len());
    for (expected_k, (line, row)) in rows.into_iter().enumerate() {
        if row.len() != 2 {
            return Err(ParseError::Ragged {
                path: label.to_path_buf(),
                line,
                expected: 2,
                found: row.len(),
            }
            .into());
        }
        if row[0] != expected_k as f64 {
            return Err(Error::Config(format!(
                "{}:{line}: expected k = {expected_k}, found {}",
                label.display(),
                row[0]
            )));
        }
        phi.push(row[1]);
    }
    Ok(phi)
}

/// JSON form of a matching, optionally with the selection details.
///
/// Fields serialize in declaration order; absent options are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingReport {
    pub pairs: PartialMatching,
    pub k: usize,
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_hat: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_bar_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Vec<StepDiagnostic>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_clamped: Option<bool>,
}

impl MatchingReport {
    pub fn from_matching(pairs: PartialMatching, phi: f64) -> Self {
        Self {
            k: pairs.len(),
            pairs,
            phi,
            k_hat: None,
            sigma_bar_sq: None,
            diagnostics: None,
            gamma_clamped: None,
        }
    }

    pub fn from_outcome(outcome: &SelectionOutcome) -> Self {
        Self {
            pairs: outcome.matching.clone(),
            k: outcome.matching.len(),
            phi: outcome.phi,
            k_hat: Some(outcome.k_hat),
            sigma_bar_sq: outcome.sigma_bar_sq,
            diagnostics: Some(outcome.diagnostics.clone()),
            gamma_clamped: Some(outcome.gamma_clamped),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub fn save_matching_json(report: &MatchingReport, path: impl AsRef<Path>) -> Result<()> {
    let mut s = report.to_json();
    s.push('\n');
    write_file(path.as_ref(), &s)
}

pub fn load_matching_json(path: impl AsRef<Path>) -> Result<MatchingReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Ground truth written next to a synthetic instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub pi_star: PartialMatching,
    pub k_star: usize,
    pub sigma: f64,
    pub sigma_sharp: f64,
    pub kappa_bar: Option<f64>,
}

impl TruthRecord {
    pub fn new(gt: &GroundTruth) -> Self {
        Self {
            pi_star: gt.pi_star().clone(),
            k_star: gt.k_star(),
            sigma: gt.sigma(),
            sigma_sharp: gt.sigma_sharp(),
            kappa_bar: crate::synth::kappa_bar_all(gt).ok(),
        }
    }
}

pub fn save_truth_json(gt: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    let mut s = serde_json::to_string_pretty(&TruthRecord::new(gt))?;
    s.push('\n');
    write_file(path.as_ref(), &s)
}

pub fn write_table_csv(table: &ExperimentTable, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &table.to_csv_string())
}

/// `k_hat,count` rows.
pub fn histogram_csv(hist: &[(usize, usize)]) -> String {
    let mut out = String::from("k_hat,count\n");
    for (k, c) in hist {
        writeln!(out, "{k},{c}").unwrap();
    }
    out
}

/// Pairs of feature files, one `x.csv,y.csv` pair per line.
///
/// Relative paths are resolved against the manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<(PathBuf, PathBuf)>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(io_err(path))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut pairs = Vec::new();
    for record in csv_reader(file).records() {
        let record = record.map_err(|source| ParseError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(ParseError::Ragged {
                path: path.to_path_buf(),
                line,
                expected: 2,
                found: record.len(),
            }
            .into());
        }
        pairs.push((base.join(&record[0]), base.join(&record[1])));
    }
    if pairs.is_empty() {
        return Err(ParseError::Empty {
            path: path.to_path_buf(),
        }
        .into());
    }
    Ok(pairs)
}

const KNOWN_METRICS: [&str; 5] = [
    METRIC_PRECISION,
    METRIC_SUBSET_RECOVERY,
    METRIC_K_HAT,
    METRIC_SIGMA_BAR_SQ,
    METRIC_EXACT_RECOVERY,
];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

/// SVG document plotting `metric` mean against `kappa_bar`, with a
/// `mean +- stderr` band and one circle per row.
pub fn plot_svg(table: &ExperimentTable, metric: &str) -> Result<String> {
    if !KNOWN_METRICS.contains(&metric) {
        return Err(Error::UnknownMetric(metric.to_string()));
    }
    let mut rows: Vec<_> = table.metric_rows(metric).collect();
    if rows.is_empty() {
        return Err(Error::EmptyTable(metric.to_string()));
    }
    rows.sort_by(|a, b| a.kappa_bar.total_cmp(&b.kappa_bar));

    let (x0, x1) = padded(rows[0].kappa_bar, rows[rows.len() - 1].kappa_bar);
    let (y0, y1) = match metric {
        METRIC_PRECISION | METRIC_SUBSET_RECOVERY | METRIC_EXACT_RECOVERY => (0.0, 1.05),
        _ => {
            let lo = rows.iter().map(|r| r.mean - r.stderr).fold(f64::INFINITY, f64::min);
            let hi = rows.iter().map(|r| r.mean + r.stderr).fold(f64::NEG_INFINITY, f64::max);
            padded(lo.min(0.0), hi)
        }
    };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();

    for t in 0..=5 {
        let fx = x0 + (x1 - x0) * t as f64 / 5.0;
        let fy = y0 + (y1 - y0) * t as f64 / 5.0;
        let (px, py) = (sx(fx), sy(fy));
        writeln!(
            s,
            r##"<line x1="{px:.1}" y1="{TOP}" x2="{px:.1}" y2="{:.1}" stroke="#eee"/>"##,
            TOP + ph
        )
        .unwrap();
        writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#eee"/>"##,
            LEFT + pw
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{fx:.3}</text>"#,
            TOP + ph + 18.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{fy:.3}</text>"#,
            LEFT - 6.0,
            py + 4.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">realized kappa_bar</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{metric}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    )
    .unwrap();

    let upper: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.2},{:.2}", sx(r.kappa_bar), sy(r.mean + r.stderr)))
        .collect();
    let lower: Vec<String> = rows
        .iter()
        .rev()
        .map(|r| format!("{:.2},{:.2}", sx(r.kappa_bar), sy(r.mean - r.stderr)))
        .collect();
    if rows.len() > 1 {
        writeln!(
            s,
            r##"<polygon points="{} {}" fill="#1f77b4" fill-opacity="0.2" stroke="none"/>"##,
            upper.join(" "),
            lower.join(" ")
        )
        .unwrap();
        let mean: Vec<String> = rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", sx(r.kappa_bar), sy(r.mean)))
            .collect();
        writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##,
            mean.join(" ")
        )
        .unwrap();
    } else {
        let r = rows[0];
        writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#1f77b4" stroke-opacity="0.4" stroke-width="6"/>"##,
            sy(r.mean + r.stderr),
            sy(r.mean - r.stderr),
            x = sx(r.kappa_bar)
        )
        .unwrap();
    }
    for r in &rows {
        writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f77b4"/>"##,
            sx(r.kappa_bar),
            sy(r.mean)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes [`plot_svg`] to `path`; nothing is created on error.
pub fn emit_plot_svg(table: &ExperimentTable, metric: &str, path: impl AsRef<Path>) -> Result<()> {
    let svg = plot_svg(table, metric)?;
    write_file(path.as_ref(), &svg)
}
