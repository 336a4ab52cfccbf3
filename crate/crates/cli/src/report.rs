//! Report tables. Every table is built once as rows of [`Cell`]s and rendered
//! to CSV and Markdown by the same formatter, so both agree cell for cell.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pyramask::evaluation::{EvalReport, IouHistogram, HISTOGRAM_BINS};

use crate::Failure;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Count(usize),
    Real(f64),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Count(n) => n.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Empty => String::new(),
        }
    }
}

pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        let s = format!("{x:.4}");
        if s == "-0.0000" {
            "0.0000".into()
        } else {
            s
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|c| csv_field(&c.render())).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("| {} |\n", self.header.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(self.header.len()));
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|c| c.render().replace('|', "\\|")).collect();
            let _ = writeln!(out, "| {} |", fields.join(" | "));
        }
        out
    }
}

/// One method's sweep result.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodReport {
    pub method: String,
    pub report: EvalReport,
}

/// `(matched - reference) / reference`; `inf` when only the reference is zero.
pub fn relative_improvement(matched: usize, reference: usize) -> f64 {
    match (matched, reference) {
        (0, 0) => 0.0,
        (_, 0) => f64::INFINITY,
        (m, r) => (m as f64 - r as f64) / r as f64,
    }
}

pub const METRIC_HEADER: [&str; 9] = [
    "method",
    "iou_threshold",
    "matched",
    "num_pred",
    "num_gt",
    "precision",
    "recall",
    "f_measure",
    "relative_improvement",
];

/// Per-method, per-threshold rows. Relative improvement compares matched
/// counts against the `reference` method at the same threshold.
pub fn metrics_table(reports: &[MethodReport], reference: Option<&str>) -> Table {
    let base = reference.and_then(|name| reports.iter().find(|r| r.method == name));
    let mut rows = Vec::new();
    for mr in reports {
        for (k, row) in mr.report.rows.iter().enumerate() {
            let rel = match base {
                Some(b) => Cell::Real(relative_improvement(row.matched, b.report.rows[k].matched)),
                None => Cell::Empty,
            };
            rows.push(vec![
                Cell::Text(mr.method.clone()),
                Cell::Real(row.iou_threshold),
                Cell::Count(row.matched),
                Cell::Count(row.num_pred),
                Cell::Count(row.num_gt),
                Cell::Real(row.precision),
                Cell::Real(row.recall),
                Cell::Real(row.f_measure),
                rel,
            ]);
        }
    }
    Table {
        header: METRIC_HEADER.to_vec(),
        rows,
    }
}

pub fn histogram_table(reports: &[MethodReport]) -> Table {
    let mut rows = Vec::new();
    for mr in reports {
        for k in 0..HISTOGRAM_BINS {
            let (lo, hi) = IouHistogram::bin_range(k);
            rows.push(vec![
                Cell::Text(mr.method.clone()),
                Cell::Real(lo),
                Cell::Real(hi),
                Cell::Count(mr.report.histogram.counts[k]),
            ]);
        }
    }
    Table {
        header: vec!["method", "iou_low", "iou_high", "count"],
        rows,
    }
}

/// A record that could not be loaded or decoded.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ErrorRow {
    pub record: String,
    pub method: String,
    pub stage: &'static str,
    pub message: String,
}

pub fn errors_table(errors: &[ErrorRow]) -> Table {
    let rows = errors
        .iter()
        .map(|e| {
            vec![
                Cell::Text(e.record.clone()),
                Cell::Text(e.method.clone()),
                Cell::Text(e.stage.to_string()),
                Cell::Text(e.message.clone()),
            ]
        })
        .collect();
    Table {
        header: vec!["record", "method", "stage", "message"],
        rows,
    }
}

pub fn markdown_report(metrics: &Table, histogram: &Table) -> String {
    format!(
        "## IoU sweep\n\n{}\n## IoU histogram (matches at 0.5)\n\n{}",
        metrics.to_markdown(),
        histogram.to_markdown()
    )
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Writes report.csv, report.md and histogram.csv (and errors.csv when
/// `errors` is given) into `dir`.
pub fn write_reports(
    dir: &Path,
    reports: &[MethodReport],
    reference: Option<&str>,
    errors: Option<&[ErrorRow]>,
) -> Result<String, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    let metrics = metrics_table(reports, reference);
    let hist = histogram_table(reports);
    let md = markdown_report(&metrics, &hist);
    write(&dir.join("report.csv"), &metrics.to_csv())?;
    write(&dir.join("histogram.csv"), &hist.to_csv())?;
    write(&dir.join("report.md"), &md)?;
    if let Some(errors) = errors {
        write(&dir.join("errors.csv"), &errors_table(errors).to_csv())?;
    }
    Ok(md)
}
