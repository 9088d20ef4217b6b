use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::cv::{Configuration, CvReport};
use super::metrics::{Rates, RocPoint};
use super::EvalError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ReportFile {
    schema_version: u32,
    columns: Vec<String>,
    #[serde(flatten)]
    report: CvReport,
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Where the ROC curve of `config` goes for a report written to `report_path`:
/// `<stem>-roc-<tag>.csv` next to the report.
pub fn roc_path(report_path: &Path, config: Configuration) -> PathBuf {
    let stem = report_path
        .file_stem()
        .map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
    report_path.with_file_name(format!("{stem}-roc-{}.csv", config.tag()))
}

pub fn roc_csv(points: &[RocPoint]) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.threshold, p.fpr, p.tpr);
    }
    out
}

pub fn report_json(report: &CvReport) -> String {
    let file = ReportFile {
        schema_version: REPORT_SCHEMA_VERSION,
        columns: Rates::COLUMNS.iter().map(|c| c.to_string()).collect(),
        report: report.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("report serialises");
    text.push('\n');
    text
}

/// Writes the JSON report to `path` and one pooled ROC CSV per configuration.
pub fn write_report(report: &CvReport, path: impl AsRef<Path>) -> Result<(), EvalError> {
    let path = path.as_ref();
    std::fs::write(path, report_json(report)).map_err(io_error(path))?;
    for c in &report.configurations {
        let roc = roc_path(path, c.config);
        std::fs::write(&roc, roc_csv(&c.pooled.roc_points)).map_err(io_error(&roc))?;
    }
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<CvReport, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    let file: ReportFile =
        serde_json::from_str(&text).map_err(|e| EvalError::BadReport(e.to_string()))?;
    if file.schema_version != REPORT_SCHEMA_VERSION {
        return Err(EvalError::BadReport(format!(
            "schema_version {}",
            file.schema_version
        )));
    }
    Ok(file.report)
}

fn table(out: &mut String, heading: &str, rows: &[(&str, Rates)]) {
    let _ = write!(out, "{heading:<12}");
    for c in Rates::COLUMNS {
        let _ = write!(out, " {c:>6}");
    }
    out.push('\n');
    for (name, rates) in rows {
        let _ = write!(out, "{name:<12}");
        for v in rates.values() {
            let _ = write!(out, " {v:>6.3}");
        }
        out.push('\n');
    }
}

/// Fold-mean metrics as two text tables: base classifiers, then combiners.
pub fn render_tables(report: &CvReport) -> String {
    let pick = |combined: bool| -> Vec<(&str, Rates)> {
        report
            .configurations
            .iter()
            .filter(|c| matches!(c.config, Configuration::Combined(_)) == combined)
            .map(|c| (c.name.as_str(), c.mean))
            .collect()
    };
    let mut out = String::new();
    table(&mut out, "Algorithm", &pick(false));
    out.push('\n');
    table(&mut out, "Combination", &pick(true));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{cross_validate, CvConfig};
    use crate::features::Label;
    use crate::learners::test_support::matrix;

    fn small_report() -> CvReport {
        let rows: Vec<_> = (0..30u8)
            .map(|i| {
                let bits = vec![i & 1, i >> 1 & 1, (i % 5 == 0) as u8];
                let label = if bits[0] == 1 { Label::Suspicious } else { Label::Benign };
                (bits, label)
            })
            .collect();
        cross_validate(&matrix(&rows), &CvConfig { folds: 3, ..CvConfig::default() }).unwrap()
    }

    #[test]
    fn round_trip_and_layout() {
        let report = small_report();
        assert_eq!(report.configurations.len(), 9);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        write_report(&report, &path).unwrap();
        let back = read_report(&path).unwrap();
        assert_eq!(back, report);
        for c in &report.configurations {
            let csv = std::fs::read_to_string(roc_path(&path, c.config)).unwrap();
            assert!(csv.starts_with("threshold,fpr,tpr\ninf,0,0\n"));
            assert!(csv.ends_with("-inf,1,1\n"));
        }
        let tables = render_tables(&report);
        assert_eq!(tables.lines().filter(|l| !l.is_empty()).count(), 11);
        assert!(tables.starts_with("Algorithm       TPR    TNR    FPR    FNR    ACC    ERR    AUC\nNB "));
    }

    #[test]
    fn empty_report_is_header_only() {
        let report = CvReport {
            folds: 10,
            seed: 42,
            samples: 0,
            class_counts: [0, 0],
            configurations: vec![],
        };
        let text = report_json(&report);
        assert!(text.contains("\"configurations\": []"));
        assert!(text.contains("\"TPR\""));
    }
}
