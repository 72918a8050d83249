use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExperimentResult;
use crate::error::{Error, Result};

/// Machine-readable fields of one result; one CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub reduction: String,
    pub classifier: String,
    pub feature_dim: usize,
    pub test_accuracy: f64,
    pub train_accuracy: f64,
    /// Empty unless timings were requested, so reports stay byte-reproducible.
    pub seconds: Option<f64>,
}

impl ReportRow {
    pub fn from_result(r: &ExperimentResult, timings: bool) -> Self {
        Self {
            dataset: r.dataset.clone(),
            reduction: r.reduction.clone(),
            classifier: r.classifier.clone(),
            feature_dim: r.feature_dim,
            test_accuracy: r.test_accuracy,
            train_accuracy: r.train_accuracy,
            seconds: timings.then(|| r.total_seconds()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            other => Err(Error::InvalidArgument(format!("unknown report format {other:?}"))),
        }
    }
}

pub fn emit_report(rows: &[ReportRow], format: ReportFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Empty("report"));
    }
    match format {
        ReportFormat::Csv => emit_csv(rows),
        ReportFormat::Markdown => Ok(emit_markdown(rows)),
    }
}

fn emit_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Report(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
}

/// Reads rows back from CSV written by [`emit_report`].
pub fn parse_report(text: &str) -> Result<Vec<ReportRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Report(e.to_string()))
}

fn percent(v: f64) -> String {
    format!("{:.1}", 100.0 * v)
}

// Accuracy grid with one row per dataset/classifier and one column per
// reduction, followed by the full-precision rows in input order.
fn emit_markdown(rows: &[ReportRow]) -> String {
    let mut columns: Vec<(&str, usize)> = Vec::new();
    let mut groups: Vec<(&str, &str)> = Vec::new();
    for r in rows {
        let col = (r.reduction.as_str(), r.feature_dim);
        if !columns.contains(&col) {
            columns.push(col);
        }
        let group = (r.dataset.as_str(), r.classifier.as_str());
        if !groups.contains(&group) {
            groups.push(group);
        }
    }
    let header = |&(label, dim): &(&str, usize)| {
        if columns.iter().filter(|c| c.0 == label).count() > 1 {
            format!("{label} ({dim})")
        } else {
            label.to_string()
        }
    };

    let mut out = String::new();
    out.push_str("| Dataset | Classifier |");
    for c in &columns {
        let _ = write!(out, " {} |", header(c));
    }
    out.push_str("\n|---|---|");
    out.push_str(&"---:|".repeat(columns.len()));
    out.push('\n');
    for &(dataset, classifier) in &groups {
        let _ = write!(out, "| {dataset} | {classifier} |");
        for &(label, dim) in &columns {
            let cell = rows
                .iter()
                .rev()
                .find(|r| r.dataset == dataset && r.classifier == classifier && r.reduction == label && r.feature_dim == dim)
                .map_or_else(|| "–".to_string(), |r| percent(r.test_accuracy));
            let _ = write!(out, " {cell} |");
        }
        out.push('\n');
    }

    out.push_str("\n| dataset | reduction | classifier | feature_dim | test accuracy (%) | test_accuracy | train_accuracy | seconds |\n");
    out.push_str("|---|---|---|---:|---:|---:|---:|---:|\n");
    for r in rows {
        let seconds = r.seconds.map(|s| format!("{s:.2}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            r.dataset,
            r.reduction,
            r.classifier,
            r.feature_dim,
            percent(r.test_accuracy),
            r.test_accuracy,
            r.train_accuracy,
            seconds
        );
    }
    out
}
