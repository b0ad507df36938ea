use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::baseline::CurvePoint;
use super::metrics::{ConfusionMatrix, MetricsReport};
use crate::{Error, Result};

pub const METRICS_FILE: &str = "metrics.csv";
pub const CONFUSION_FILE: &str = "confusion.csv";
pub const CURVE_FILE: &str = "curve.csv";

fn write(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn metrics_csv(report: &MetricsReport) -> String {
    let mut out = String::from("metric,value\n");
    for (name, v) in report.rows() {
        let _ = writeln!(out, "{name},{v}");
    }
    out
}

/// Rows are the actual class, columns the predicted class.
pub fn confusion_csv(cm: &ConfusionMatrix) -> String {
    format!(
        "actual,predicted_deformed,predicted_non_deformed\ndeformed,{},{}\nnon_deformed,{},{}\n",
        cm.tp, cm.fn_, cm.fp, cm.tn
    )
}

pub fn curve_csv(curve: &[CurvePoint]) -> String {
    let mut out = String::from("epoch,loss,accuracy\n");
    for p in curve {
        let _ = writeln!(out, "{},{},{}", p.epoch, p.loss, p.accuracy);
    }
    out
}

/// Writes `metrics.csv` and `confusion.csv` into `dir`.
pub fn write_evaluation(dir: &Path, cm: &ConfusionMatrix, report: &MetricsReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join(METRICS_FILE), metrics_csv(report))?;
    write(&dir.join(CONFUSION_FILE), confusion_csv(cm))
}

pub fn write_curve(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    write(path, curve_csv(curve))
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

pub fn read_metrics(path: &Path) -> Result<MetricsReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut vals = [None; 4];
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (name, v) = line.split_once(',').ok_or_else(|| parse_err(path, i + 1, "expected `metric,value`"))?;
        let v: f64 = v.trim().parse().map_err(|_| parse_err(path, i + 1, format!("bad value `{v}`")))?;
        let slot = match name.trim().to_ascii_lowercase().as_str() {
            "accuracy" => 0,
            "f1" => 1,
            "recall" => 2,
            "precision" => 3,
            _ => continue,
        };
        vals[slot] = Some(v);
    }
    let get = |i: usize, name: &str| vals[i].ok_or_else(|| parse_err(path, 0, format!("missing `{name}` row")));
    Ok(MetricsReport {
        accuracy: get(0, "accuracy")?,
        f1: get(1, "f1")?,
        recall: get(2, "recall")?,
        precision: get(3, "precision")?,
        undefined: Vec::new(),
    })
}

pub fn read_confusion(path: &Path) -> Result<ConfusionMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = std::collections::BTreeMap::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 3 {
            return Err(parse_err(path, i + 1, "expected 3 columns"));
        }
        let num = |s: &str| s.parse::<u64>().map_err(|_| parse_err(path, i + 1, format!("bad count `{s}`")));
        rows.insert(cells[0].to_string(), (num(cells[1])?, num(cells[2])?));
    }
    let (tp, fn_) = *rows.get("deformed").ok_or_else(|| parse_err(path, 0, "missing `deformed` row"))?;
    let (fp, tn) = *rows.get("non_deformed").ok_or_else(|| parse_err(path, 0, "missing `non_deformed` row"))?;
    Ok(ConfusionMatrix { tp, fp, fn_, tn })
}

/// Rows Accuracy, F1, Recall, Precision; one column per evaluation.
pub struct ReportTable {
    pub columns: Vec<(String, MetricsReport)>,
}

impl ReportTable {
    const ROWS: [&'static str; 4] = ["Accuracy", "F1", "Recall", "Precision"];

    fn value(r: &MetricsReport, row: usize) -> f64 {
        r.rows()[row].1
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric");
        for (name, _) in &self.columns {
            let _ = write!(out, ",{name}");
        }
        out.push('\n');
        for (i, row) in Self::ROWS.iter().enumerate() {
            out.push_str(row);
            for (_, r) in &self.columns {
                let _ = write!(out, ",{:.3}", Self::value(r, i));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let width = self.columns.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(6);
        let mut out = format!("{:<10}", "");
        for (name, _) in &self.columns {
            let _ = write!(out, " {name:>width$}");
        }
        out.push('\n');
        for (i, row) in Self::ROWS.iter().enumerate() {
            let _ = write!(out, "{row:<10}");
            for (_, r) in &self.columns {
                let _ = write!(out, " {:>width$.3}", Self::value(r, i));
            }
            out.push('\n');
        }
        out
    }
}
