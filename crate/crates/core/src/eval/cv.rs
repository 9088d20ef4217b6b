use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{make_folds, FoldPlan};
use super::metrics::{compute_metrics, ConfusionCounts, MetricsReport, Rates};
use super::EvalError;
use crate::ensemble::{combine_slice, Scheme};
use crate::features::{Label, SampleMatrix};
use crate::learners::{train, Algorithm, Posterior, TrainOptions};

/// A base classifier or a combination scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "tag")]
pub enum Configuration {
    Base(Algorithm),
    Combined(Scheme),
}

impl Configuration {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Base(a) => a.display_name(),
            Self::Combined(s) => s.display_name(),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Base(a) => a.tag(),
            Self::Combined(s) => s.tag(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub schemes: Vec<Scheme>,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            seed: 42,
            algorithms: Algorithm::ALL.to_vec(),
            schemes: Scheme::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigReport {
    pub config: Configuration,
    pub name: String,
    /// Unweighted mean of the per-fold metrics.
    pub mean: Rates,
    /// Metrics over all held-out predictions pooled together.
    pub pooled: MetricsReport,
    pub folds: Vec<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub seed: u64,
    pub samples: usize,
    /// `[benign, suspicious]`.
    pub class_counts: [usize; 2],
    pub configurations: Vec<ConfigReport>,
}

impl CvReport {
    pub fn get(&self, config: Configuration) -> Option<&ConfigReport> {
        self.configurations.iter().find(|c| c.config == config)
    }
}

/// Held-out predictions of one configuration on one fold.
#[derive(Default)]
struct Predictions {
    counts: ConfusionCounts,
    scores: Vec<(f64, Label)>,
}

impl Predictions {
    fn push(&mut self, truth: Label, decision: Label, score: f64) {
        self.counts.record(truth, decision);
        self.scores.push((score, truth));
    }
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn canonical<T: Ord + Copy>(items: &[T]) -> Vec<T> {
    let mut v = items.to_vec();
    v.sort();
    v.dedup();
    v
}

fn run_fold(
    m: &SampleMatrix,
    plan: &FoldPlan,
    fold: usize,
    algorithms: &[Algorithm],
    schemes: &[Scheme],
) -> Result<Vec<Predictions>, EvalError> {
    let train_idx = plan.train_indices(fold);
    let test_idx = plan.test_indices(fold);
    let mut in_train = vec![false; m.len()];
    for &i in &train_idx {
        in_train[i] = true;
    }
    assert!(
        test_idx.iter().all(|&i| !in_train[i]),
        "fold {fold}: a test sample is in its own training split"
    );
    let train_m = m.select(&train_idx);
    let opts = TrainOptions::with_seed(fold_seed(plan.seed, fold));
    let models = algorithms
        .iter()
        .map(|&a| train(a, &train_m, &opts))
        .collect::<Result<Vec<_>, _>>()?;

    let mut out: Vec<Predictions> = (0..algorithms.len() + schemes.len())
        .map(|_| Predictions::default())
        .collect();
    for &i in &test_idx {
        let sample = &m.samples()[i];
        let posteriors = models
            .iter()
            .map(|model| model.predict(&sample.vector.bits))
            .collect::<Result<Vec<Posterior>, _>>()?;
        for (slot, p) in out.iter_mut().zip(&posteriors) {
            slot.push(sample.label, p.decision(), p.p_sus);
        }
        for (slot, &scheme) in out[algorithms.len()..].iter_mut().zip(schemes) {
            let (decision, score) = combine_slice(&posteriors, scheme);
            slot.push(sample.label, decision, score);
        }
    }
    Ok(out)
}

/// k-fold cross-validation of the requested base classifiers and of the
/// requested schemes applied to their posteriors.
pub fn cross_validate(m: &SampleMatrix, config: &CvConfig) -> Result<CvReport, EvalError> {
    let k = config.folds;
    let plan = make_folds(m, k, config.seed)?;
    for class in Label::ALL {
        let count = m.class_counts()[class.index()];
        if count < k {
            return Err(EvalError::ClassTooSmall { class, count, k });
        }
    }
    let algorithms = canonical(&config.algorithms);
    let schemes = canonical(&config.schemes);
    if algorithms.is_empty() && !schemes.is_empty() {
        return Err(EvalError::NoClassifiers);
    }
    let configs: Vec<Configuration> = algorithms
        .iter()
        .map(|&a| Configuration::Base(a))
        .chain(schemes.iter().map(|&s| Configuration::Combined(s)))
        .collect();

    let per_fold = (0..k)
        .into_par_iter()
        .map(|fold| run_fold(m, &plan, fold, &algorithms, &schemes))
        .collect::<Result<Vec<_>, _>>()?;

    let mut configurations = Vec::with_capacity(configs.len());
    for (c, &config) in configs.iter().enumerate() {
        let mut pooled = Predictions::default();
        let mut folds = Vec::with_capacity(k);
        for preds in &per_fold {
            let p = &preds[c];
            let mut report = compute_metrics(p.counts, &p.scores)?;
            report.roc_points.clear();
            folds.push(report);
            pooled.counts.tp += p.counts.tp;
            pooled.counts.tn += p.counts.tn;
            pooled.counts.fp += p.counts.fp;
            pooled.counts.fn_ += p.counts.fn_;
            pooled.scores.extend_from_slice(&p.scores);
        }
        let rates: Vec<Rates> = folds.iter().map(|f| f.rates).collect();
        configurations.push(ConfigReport {
            config,
            name: config.name().to_string(),
            mean: Rates::mean(&rates),
            pooled: compute_metrics(pooled.counts, &pooled.scores)?,
            folds,
        });
    }
    Ok(CvReport {
        folds: k,
        seed: config.seed,
        samples: m.len(),
        class_counts: m.class_counts(),
        configurations,
    })
}
