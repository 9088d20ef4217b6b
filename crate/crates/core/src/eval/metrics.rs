use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::features::Label;

/// Confusion counts with suspicious as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Suspicious, Label::Suspicious) => self.tp += 1,
            (Label::Suspicious, Label::Benign) => self.fn_ += 1,
            (Label::Benign, Label::Benign) => self.tn += 1,
            (Label::Benign, Label::Suspicious) => self.fp += 1,
        }
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }
}

/// The seven reported metrics, in table column order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub tpr: f64,
    pub tnr: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub acc: f64,
    pub err: f64,
    pub auc: f64,
}

impl Rates {
    pub const COLUMNS: [&'static str; 7] = ["TPR", "TNR", "FPR", "FNR", "ACC", "ERR", "AUC"];

    pub fn values(&self) -> [f64; 7] {
        [self.tpr, self.tnr, self.fpr, self.fnr, self.acc, self.err, self.auc]
    }

    /// TPR/TNR-derived metrics; `auc` is left at zero.
    pub fn from_counts(c: &ConfusionCounts) -> Result<Self, EvalError> {
        if c.positives() == 0 || c.negatives() == 0 {
            return Err(EvalError::EmptyClass);
        }
        let tpr = c.tp as f64 / c.positives() as f64;
        let tnr = c.tn as f64 / c.negatives() as f64;
        let acc = (tpr + tnr) / 2.0;
        Ok(Self {
            tpr,
            tnr,
            fpr: c.fp as f64 / c.negatives() as f64,
            fnr: c.fn_ as f64 / c.positives() as f64,
            acc,
            err: 1.0 - acc,
            auc: 0.0,
        })
    }

    /// Unweighted mean of each metric.
    pub fn mean(all: &[Rates]) -> Rates {
        let n = all.len() as f64;
        let mut sum = [0.0; 7];
        for r in all {
            for (s, v) in sum.iter_mut().zip(r.values()) {
                *s += v;
            }
        }
        let [tpr, tnr, fpr, fnr, acc, err, auc] = sum.map(|s| s / n);
        Rates {
            tpr,
            tnr,
            fpr,
            fnr,
            acc,
            err,
            auc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    #[serde(with = "threshold_text")]
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Thresholds include the infinite sentinels, which JSON numbers cannot hold.
mod threshold_text {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &f64, s: S) -> Result<S::Ok, S::Error> {
        match *t {
            f64::INFINITY => s.serialize_str("inf"),
            f64::NEG_INFINITY => s.serialize_str("-inf"),
            t => s.serialize_f64(t),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(t) => Ok(t),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Text(t) => Err(D::Error::custom(format!("bad threshold {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rates: Rates,
    pub counts: ConfusionCounts,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roc_points: Vec<RocPoint>,
}

fn class_sizes(scores: &[(f64, Label)]) -> Result<(f64, f64), EvalError> {
    let pos = scores.iter().filter(|s| s.1 == Label::Suspicious).count();
    let neg = scores.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::EmptyClass);
    }
    Ok((pos as f64, neg as f64))
}

/// Area under the ROC curve as the Mann-Whitney statistic over midranks.
pub fn auc_rank(scores: &[(f64, Label)]) -> Result<f64, EvalError> {
    let (pos, neg) = class_sizes(scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].0.total_cmp(&scores[b].0));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]].0 == scores[order[start]].0 {
            end += 1;
        }
        // ranks are 1-based; a tied run shares the mean of its ranks
        let midrank = (start + end + 2) as f64 / 2.0;
        let tied_pos = order[start..=end]
            .iter()
            .filter(|&&i| scores[i].1 == Label::Suspicious)
            .count();
        rank_sum += midrank * tied_pos as f64;
        start = end + 1;
    }
    Ok((rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg))
}

/// ROC curve from thresholds at every distinct score plus the two
/// infinite sentinels; a sample is flagged when its score is `>=` the
/// threshold.
pub fn roc_curve(scores: &[(f64, Label)]) -> Result<Vec<RocPoint>, EvalError> {
    let (pos, neg) = class_sizes(scores)?;
    let mut sorted: Vec<(f64, Label)> = scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == t {
            match sorted[i].1 {
                Label::Suspicious => tp += 1,
                Label::Benign => fp += 1,
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: t,
            fpr: fp as f64 / neg,
            tpr: tp as f64 / pos,
        });
    }
    points.push(RocPoint {
        threshold: f64::NEG_INFINITY,
        fpr: 1.0,
        tpr: 1.0,
    });
    Ok(points)
}

pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
        .sum()
}

/// Metrics for one set of predictions. `scores` pairs each sample's
/// suspicious score with its true label.
pub fn compute_metrics(counts: ConfusionCounts, scores: &[(f64, Label)]) -> Result<MetricsReport, EvalError> {
    let mut rates = Rates::from_counts(&counts)?;
    rates.auc = auc_rank(scores)?;
    let roc_points = roc_curve(scores)?;
    debug_assert!((trapezoid_area(&roc_points) - rates.auc).abs() < 1e-9);
    Ok(MetricsReport {
        rates,
        counts,
        roc_points,
    })
}
