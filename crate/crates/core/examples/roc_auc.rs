//! Confusion-matrix rates, ROC curve and AUC for a handful of scores.

use droidscan::eval::{auc_rank, compute_metrics, roc_curve, trapezoid_area, ConfusionCounts};
use droidscan::features::Label;

fn main() {
    let scored: Vec<(f64, Label)> = [
        (0.95, true),
        (0.90, true),
        (0.80, false),
        (0.70, true),
        (0.70, false),
        (0.40, true),
        (0.30, false),
        (0.10, false),
    ]
    .iter()
    .map(|&(s, sus)| (s, if sus { Label::Suspicious } else { Label::Benign }))
    .collect();

    let mut counts = ConfusionCounts::default();
    for &(s, truth) in &scored {
        counts.record(truth, if s > 0.5 { Label::Suspicious } else { Label::Benign });
    }
    let report = compute_metrics(counts, &scored).expect("both classes present");
    println!("{counts:?}");
    for (name, v) in ["TPR", "TNR", "FPR", "FNR", "ACC", "ERR", "AUC"].iter().zip(report.rates.values()) {
        println!("  {name} {v:.4}");
    }

    let roc = roc_curve(&scored).unwrap();
    println!("\nthreshold    fpr    tpr");
    for p in &roc {
        println!("{:>9} {:>6.3} {:>6.3}", p.threshold, p.fpr, p.tpr);
    }
    println!("\nrank AUC {:.4}, trapezoid AUC {:.4}", auc_rank(&scored).unwrap(), trapezoid_area(&roc));
}
