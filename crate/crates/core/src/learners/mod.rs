//! The five base classifiers and their shared model plumbing.
//!
//! Every learner trains on a [`SampleMatrix`] and answers with a
//! two-class [`Posterior`]. Tree and rule learners turn the class counts
//! at the deciding leaf or rule into probabilities with Laplace's rule,
//! `(n_c + 1) / (n + 2)`.

mod c45;
mod logistic;
mod model;
mod naive_bayes;
mod part;
mod ridor;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::features::{Label, SampleMatrix};

pub use logistic::{train_simple_logistic, FeatureWeight, SimpleLogisticModel};
pub use model::{load_model, save_model, ModelPayload, TrainedModel, MODEL_SCHEMA_VERSION};
pub use naive_bayes::{train_naive_bayes, NaiveBayesModel};
pub use part::{train_part, Condition, Rule, RuleListModel};
pub use ridor::{train_ridor, Exception, RippleDownModel};
pub use tree::{train_decision_tree, DecisionTreeModel, TreeNode};

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error("training data contains a single class")]
    SingleClassData,
    #[error("vector has {got} features, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("boosting produced non-finite responses")]
    NoConvergence,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("corrupt model: {0}")]
    CorruptModel(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Two-class probability output of one classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub p_sus: f64,
    pub p_ben: f64,
}

impl Posterior {
    /// Builds the pair from the suspicious-class probability, clamped to [0, 1].
    pub fn from_sus(p_sus: f64) -> Self {
        let p_sus = p_sus.clamp(0.0, 1.0);
        Self {
            p_sus,
            p_ben: 1.0 - p_sus,
        }
    }

    /// Laplace-calibrated class counts.
    pub fn laplace(counts: ClassCounts) -> Self {
        Self::from_sus((counts.suspicious as f64 + 1.0) / (counts.total() as f64 + 2.0))
    }

    pub fn get(&self, label: Label) -> f64 {
        match label {
            Label::Benign => self.p_ben,
            Label::Suspicious => self.p_sus,
        }
    }

    /// The more probable class; equal probabilities go to benign.
    pub fn decision(&self) -> Label {
        if self.p_sus > self.p_ben {
            Label::Suspicious
        } else {
            Label::Benign
        }
    }
}

/// Training instances of each class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub benign: u64,
    pub suspicious: u64,
}

impl ClassCounts {
    pub fn new(benign: u64, suspicious: u64) -> Self {
        Self { benign, suspicious }
    }

    pub fn total(&self) -> u64 {
        self.benign + self.suspicious
    }

    pub fn get(&self, label: Label) -> u64 {
        match label {
            Label::Benign => self.benign,
            Label::Suspicious => self.suspicious,
        }
    }

    pub fn add(&mut self, label: Label) {
        match label {
            Label::Benign => self.benign += 1,
            Label::Suspicious => self.suspicious += 1,
        }
    }

    /// Majority class, benign on ties.
    pub fn majority(&self) -> Label {
        if self.suspicious > self.benign {
            Label::Suspicious
        } else {
            Label::Benign
        }
    }

    pub fn errors(&self) -> u64 {
        self.total() - self.get(self.majority())
    }

    pub fn is_pure(&self) -> bool {
        self.benign == 0 || self.suspicious == 0
    }

    pub fn of<'a>(labels: impl IntoIterator<Item = &'a Label>) -> Self {
        let mut counts = Self::default();
        for &label in labels {
            counts.add(label);
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Nb,
    Sl,
    Dt,
    Ridor,
    Part,
}

impl Algorithm {
    /// Committee order used when combining posteriors.
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Nb,
        Algorithm::Sl,
        Algorithm::Dt,
        Algorithm::Ridor,
        Algorithm::Part,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Nb => "nb",
            Self::Sl => "sl",
            Self::Dt => "dt",
            Self::Ridor => "ridor",
            Self::Part => "part",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Self::Nb => "NB",
            Self::Sl => "SL",
            Self::Dt => "DT",
            Self::Ridor => "RIDOR",
            Self::Part => "PART",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeOptions {
    /// Confidence factor for pessimistic error pruning.
    pub confidence: f64,
    /// Minimum instances on each side of a split.
    pub min_leaf: usize,
}

impl Default for TreeOptions {
    fn default() -> Self {
        Self {
            confidence: 0.25,
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticOptions {
    pub max_iter: usize,
    /// Folds of the internal cross-validation that picks the iteration count.
    pub cv_folds: usize,
    /// Stop a fold's boosting after this many iterations without a new best error.
    pub heuristic_stop: usize,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            cv_folds: 5,
            heuristic_stop: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidorOptions {
    pub max_depth: usize,
}

impl Default for RidorOptions {
    fn default() -> Self {
        Self { max_depth: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub seed: u64,
    pub tree: TreeOptions,
    pub logistic: LogisticOptions,
    pub ridor: RidorOptions,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            tree: TreeOptions::default(),
            logistic: LogisticOptions::default(),
            ridor: RidorOptions::default(),
        }
    }
}

impl TrainOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Row-major view of a matrix used by the trainers.
pub(crate) struct Instances<'a> {
    pub rows: Vec<&'a [bool]>,
    pub labels: Vec<Label>,
    pub width: usize,
}

impl<'a> Instances<'a> {
    pub fn new(m: &'a SampleMatrix) -> Result<Self, LearnError> {
        let rows: Vec<&[bool]> = m.samples().iter().map(|s| s.vector.bits.as_slice()).collect();
        let labels: Vec<Label> = m.labels().collect();
        let counts = ClassCounts::of(&labels);
        if counts.benign == 0 || counts.suspicious == 0 {
            return Err(LearnError::SingleClassData);
        }
        Ok(Self {
            rows,
            labels,
            width: m.width(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn counts(&self, idx: &[usize]) -> ClassCounts {
        ClassCounts::of(idx.iter().map(|&i| &self.labels[i]))
    }
}

/// Trains one algorithm.
pub fn train(
    algorithm: Algorithm,
    m: &SampleMatrix,
    opts: &TrainOptions,
) -> Result<TrainedModel, LearnError> {
    match algorithm {
        Algorithm::Nb => train_naive_bayes(m),
        Algorithm::Sl => train_simple_logistic(m, opts),
        Algorithm::Dt => train_decision_tree(m, opts),
        Algorithm::Ridor => train_ridor(m, opts),
        Algorithm::Part => train_part(m, opts),
    }
}

/// Posterior of `model` for one feature vector.
pub fn predict(model: &TrainedModel, bits: &[bool]) -> Result<Posterior, LearnError> {
    model.predict(bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_examples() {
        let p = Posterior::laplace(ClassCounts::new(0, 3));
        assert!((p.p_sus - 0.8).abs() < 1e-15);
        assert_eq!(Posterior::laplace(ClassCounts::default()), Posterior::from_sus(0.5));
        assert_eq!(Posterior::from_sus(0.5).decision(), Label::Benign);
    }

    #[test]
    fn algorithm_tags_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.tag().parse::<Algorithm>(), Ok(a));
        }
        assert!("j48".parse::<Algorithm>().is_err());
    }

    #[test]
    fn majority_prefers_benign() {
        assert_eq!(ClassCounts::new(2, 2).majority(), Label::Benign);
        assert_eq!(ClassCounts::new(1, 2).majority(), Label::Suspicious);
        assert_eq!(ClassCounts::new(1, 2).errors(), 1);
    }
}
