//! Evaluation records, relative change against a baseline run, and
//! table/CSV rendering.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean metrics of one run on one dataset's test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub run_id: String,
    /// Dataset whose test split was evaluated.
    pub dataset_name: String,
    /// Training data of the run, e.g. `EI` or `eurecom+iris`.
    pub trained_on: String,
    /// Model variant, e.g. `pix2pix` or `FG-Baseline`.
    pub experiment: String,
    pub mean_ssim: f64,
    pub mean_psnr: f64,
    pub n_images: usize,
    pub baseline_run_id: Option<String>,
    pub ssim_pct: Option<f64>,
    pub psnr_pct: Option<f64>,
    /// Percentages quoted elsewhere for this row, checked against ours.
    #[serde(default)]
    pub reference_ssim_pct: Option<f64>,
    #[serde(default)]
    pub reference_psnr_pct: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    TextTable,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text_table" => Ok(ReportFormat::TextTable),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Validation(format!(
                "unknown report format {other:?} (expected text_table or csv)"
            ))),
        }
    }
}

/// `(value − baseline) / baseline · 100`.
pub fn percent_change(value: f64, baseline: f64) -> f64 {
    (value - baseline) / baseline * 100.0
}

/// Fill the percentage columns of `current` against `baseline`.
pub fn relative_change(current: &EvalReport, baseline: &EvalReport) -> Result<EvalReport> {
    if current.dataset_name != baseline.dataset_name {
        return Err(Error::Validation(format!(
            "cannot compare {} on {} with baseline {} on {}",
            current.run_id, current.dataset_name, baseline.run_id, baseline.dataset_name
        )));
    }
    Ok(EvalReport {
        baseline_run_id: Some(baseline.run_id.clone()),
        ssim_pct: Some(percent_change(current.mean_ssim, baseline.mean_ssim)),
        psnr_pct: Some(percent_change(current.mean_psnr, baseline.mean_psnr)),
        ..current.clone()
    })
}

/// Recompute the percentages of every row naming a baseline that is also
/// among `reports` (matched on run id and dataset).
pub fn resolve_baselines(reports: &mut [EvalReport]) -> Result<()> {
    let snapshot = reports.to_vec();
    for r in reports.iter_mut() {
        let Some(base_id) = r.baseline_run_id.clone() else {
            r.ssim_pct = None;
            r.psnr_pct = None;
            continue;
        };
        match snapshot
            .iter()
            .find(|b| b.run_id == base_id && b.dataset_name == r.dataset_name)
        {
            Some(base) => *r = relative_change(r, base)?,
            None if r.ssim_pct.is_some() && r.psnr_pct.is_some() => {}
            None => {
                return Err(Error::Validation(format!(
                    "{} on {} names baseline {base_id}, which is not among the inputs",
                    r.run_id, r.dataset_name
                )))
            }
        }
    }
    Ok(())
}

/// Apply the matching rows of a baseline report to freshly evaluated rows.
pub fn apply_baseline(reports: &[EvalReport], baseline: &[EvalReport]) -> Result<Vec<EvalReport>> {
    reports
        .iter()
        .map(|r| {
            let base = baseline
                .iter()
                .find(|b| b.dataset_name == r.dataset_name && b.baseline_run_id.is_none())
                .or_else(|| baseline.iter().find(|b| b.dataset_name == r.dataset_name))
                .ok_or_else(|| {
                    Error::Validation(format!("baseline report has no row for dataset {}", r.dataset_name))
                })?;
            relative_change(r, base)
        })
        .collect()
}

/// Write full-precision records.
pub fn write_records(reports: &[EvalReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(r).map_err(|e| parse_error(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<EvalReport>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .map(|rec| rec.map_err(|e| parse_error(path, e)))
        .collect()
}

fn parse_error(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn pct(v: Option<f64>) -> String {
    match v {
        Some(p) => format!("{p:.2}%"),
        None => "-".into(),
    }
}

const COLUMNS: [&str; 6] = ["Dataset", "Experiment", "SSIM", "PSNR", "SSIM %", "PSNR %"];

fn cells(r: &EvalReport) -> [String; 6] {
    [
        r.trained_on.clone(),
        r.experiment.clone(),
        format!("{:.3}", r.mean_ssim),
        format!("{:.3}", r.mean_psnr),
        pct(r.ssim_pct),
        pct(r.psnr_pct),
    ]
}

/// Rows grouped by evaluated dataset in first-appearance order, input
/// order kept within each group.
pub fn group_by_dataset(reports: &[EvalReport]) -> Vec<(&str, Vec<&EvalReport>)> {
    let mut groups: Vec<(&str, Vec<&EvalReport>)> = Vec::new();
    for r in reports {
        match groups.iter_mut().find(|(name, _)| *name == r.dataset_name) {
            Some((_, rows)) => rows.push(r),
            None => groups.push((&r.dataset_name, vec![r])),
        }
    }
    groups
}

/// Rows whose rounded percentages disagree with their quoted reference.
pub fn discrepancy_notes(reports: &[EvalReport]) -> Vec<String> {
    let mut notes = Vec::new();
    for r in reports {
        for (metric, ours, quoted) in [
            ("SSIM %", r.ssim_pct, r.reference_ssim_pct),
            ("PSNR %", r.psnr_pct, r.reference_psnr_pct),
        ] {
            if let (Some(ours), Some(quoted)) = (ours, quoted) {
                if format!("{ours:.2}") != format!("{quoted:.2}") {
                    notes.push(format!(
                        "{} {} on {}: {metric} is {ours:.2}% from the absolute values, quoted as {quoted:.2}%",
                        r.trained_on, r.experiment, r.dataset_name
                    ));
                }
            }
        }
    }
    notes
}

pub const FORMULA_FOOTNOTE: &str =
    "SSIM % and PSNR % = (value - baseline) / baseline * 100, computed from unrounded values; '-' marks a baseline row.";

/// Render a report. CSV output is one header plus one row per report;
/// the text table adds a footnote and any discrepancy notes.
pub fn emit_report(reports: &[EvalReport], format: ReportFormat) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::Validation("nothing to report".into()));
    }
    let groups = group_by_dataset(reports);
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str("evaluated_on,dataset,experiment,ssim,psnr,ssim_pct,psnr_pct\n");
            for (name, rows) in &groups {
                for r in rows {
                    let c = cells(r);
                    let fields: Vec<String> = std::iter::once(name.to_string()).chain(c).map(csv_field).collect();
                    out.push_str(&fields.join(","));
                    out.push('\n');
                }
            }
        }
        ReportFormat::TextTable => {
            let mut widths = COLUMNS.map(str::len);
            for r in reports {
                for (w, c) in widths.iter_mut().zip(cells(r)) {
                    *w = (*w).max(c.len());
                }
            }
            let line = |row: [String; 6]| -> String {
                let mut s = String::new();
                for (i, (c, w)) in row.iter().zip(widths).enumerate() {
                    if i < 2 {
                        let _ = write!(s, "{c:<w$}");
                    } else {
                        let _ = write!(s, "{c:>w$}");
                    }
                    if i < 5 {
                        s.push_str("  ");
                    }
                }
                s.trim_end().to_string()
            };
            for (i, (name, rows)) in groups.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{name}]");
                let _ = writeln!(out, "{}", line(COLUMNS.map(String::from)));
                for r in rows {
                    let _ = writeln!(out, "{}", line(cells(r)));
                }
            }
            let _ = writeln!(out, "\n{FORMULA_FOOTNOTE}");
            for note in discrepancy_notes(reports) {
                let _ = writeln!(out, "note: {note}");
            }
        }
    }
    Ok(out)
}

fn csv_field(s: String) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(run: &str, dataset: &str, ssim: f64, psnr: f64) -> EvalReport {
        EvalReport {
            run_id: run.into(),
            dataset_name: dataset.into(),
            trained_on: run.into(),
            experiment: "pix2pix".into(),
            mean_ssim: ssim,
            mean_psnr: psnr,
            n_images: 105,
            baseline_run_id: None,
            ssim_pct: None,
            psnr_pct: None,
            reference_ssim_pct: None,
            reference_psnr_pct: None,
        }
    }

    #[test]
    fn identity_change_is_zero() {
        let a = row("a", "eurecom", 0.9, 30.0);
        let r = relative_change(&a, &a).unwrap();
        assert_eq!((r.ssim_pct, r.psnr_pct), (Some(0.0), Some(0.0)));
        assert_eq!(r.baseline_run_id.as_deref(), Some("a"));
    }

    #[test]
    fn printed_value_arithmetic() {
        let base = row("p", "eurecom", 0.906, 32.048);
        let cur = row("ei", "eurecom", 0.924, 32.133);
        let r = relative_change(&cur, &base).unwrap();
        assert_eq!(format!("{:.2}", r.ssim_pct.unwrap()), "1.99");
        let nl = row("ea", "eurecom", 0.931, 33.139);
        let r = relative_change(&nl, &base).unwrap();
        assert_eq!(format!("{:.2}", r.ssim_pct.unwrap()), "2.76");
        assert_eq!(format!("{:.2}", r.psnr_pct.unwrap()), "3.40");
    }

    #[test]
    fn dataset_mismatch_is_an_error() {
        let a = row("a", "eurecom", 0.9, 30.0);
        let b = row("b", "iris", 0.9, 30.0);
        assert!(relative_change(&a, &b).is_err());
    }

    #[test]
    fn csv_single_row() {
        let out = emit_report(&[row("a", "eurecom", 0.9061, 32.0484)], ReportFormat::Csv).unwrap();
        assert_eq!(
            out,
            "evaluated_on,dataset,experiment,ssim,psnr,ssim_pct,psnr_pct\neurecom,a,pix2pix,0.906,32.048,-,-\n"
        );
    }

    #[test]
    fn groups_keep_input_order() {
        let rows = vec![
            row("a", "eurecom", 0.9, 30.0),
            row("b", "iris", 0.6, 20.0),
            row("c", "eurecom", 0.8, 31.0),
            row("d", "iris", 0.7, 22.0),
        ];
        let groups = group_by_dataset(&rows);
        let ids: Vec<(&str, Vec<&str>)> = groups
            .iter()
            .map(|(n, rs)| (*n, rs.iter().map(|r| r.run_id.as_str()).collect()))
            .collect();
        assert_eq!(ids, vec![("eurecom", vec!["a", "c"]), ("iris", vec!["b", "d"])]);
    }

    #[test]
    fn records_round_trip_at_full_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let base = row("p", "eurecom", 0.906_123_456_789, 32.048_987_654_321);
        let cur = relative_change(&row("x", "eurecom", 1.0 / 3.0, 29.0), &base).unwrap();
        write_records(&[base.clone(), cur.clone()], &path).unwrap();
        assert_eq!(read_records(&path).unwrap(), vec![base, cur]);
    }

    #[test]
    fn unresolved_baseline_is_an_error() {
        let mut rows = vec![row("a", "eurecom", 0.9, 30.0)];
        rows[0].baseline_run_id = Some("missing".into());
        assert!(resolve_baselines(&mut rows).is_err());
    }

    #[test]
    fn empty_report_is_rejected() {
        assert!(emit_report(&[], ReportFormat::TextTable).is_err());
    }
}
