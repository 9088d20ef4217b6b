//! Stratified k-fold evaluation of the base classifiers and combiners.

mod cv;
mod folds;
mod metrics;
mod report;

use crate::features::Label;
use crate::learners::LearnError;

pub use cv::{cross_validate, ConfigReport, Configuration, CvConfig, CvReport};
pub use folds::{make_folds, FoldPlan};
pub use metrics::{
    auc_rank, compute_metrics, roc_curve, trapezoid_area, ConfusionCounts, MetricsReport, Rates,
    RocPoint,
};
pub use report::{
    read_report, render_tables, report_json, roc_csv, roc_path, write_report,
    REPORT_SCHEMA_VERSION,
};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{samples} samples cannot fill {k} folds (need k >= 2 and at least k samples)")]
    TooFewSamples { k: usize, samples: usize },
    #[error("class {class} has {count} samples, fewer than the {k} folds")]
    ClassTooSmall { class: Label, count: usize, k: usize },
    #[error("metrics need at least one sample of each class")]
    EmptyClass,
    #[error("combination schemes requested without any base classifier")]
    NoClassifiers,
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("malformed report: {0}")]
    BadReport(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
