//! Simple Logistic: LogitBoost over one-feature least-squares regressors,
//! with the number of boosting rounds picked by internal cross-validation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Instances, LearnError, LogisticOptions, Posterior, TrainOptions, TrainedModel};
use crate::features::{Label, SampleMatrix};

const MIN_WEIGHT: f64 = 1e-10;
const MAX_RESPONSE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeight {
    pub feature: usize,
    pub weight: f64,
}

/// `p_sus = 1 / (1 + exp(-(intercept + sum of weights of set bits)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleLogisticModel {
    pub intercept: f64,
    /// Nonzero coefficients in feature order.
    pub weights: Vec<FeatureWeight>,
    pub iterations_used: usize,
}

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

impl SimpleLogisticModel {
    pub fn score(&self, bits: &[bool]) -> f64 {
        self.intercept
            + self
                .weights
                .iter()
                .filter(|w| bits[w.feature])
                .map(|w| w.weight)
                .sum::<f64>()
    }

    pub fn predict(&self, bits: &[bool]) -> Posterior {
        Posterior::from_sus(sigmoid(self.score(bits)))
    }

    pub(crate) fn validate(&self, width: usize) -> Result<(), String> {
        if !self.intercept.is_finite() {
            return Err("non-finite intercept".into());
        }
        for w in &self.weights {
            if w.feature >= width || !w.weight.is_finite() {
                return Err(format!("bad weight for feature {}", w.feature));
            }
        }
        Ok(())
    }
}

/// Distinct (row, label) pairs with their multiplicities.
struct Groups {
    columns: Vec<Vec<usize>>,
    labels: Vec<Label>,
    counts: Vec<u64>,
    width: usize,
}

impl Groups {
    fn new(data: &Instances) -> Self {
        let mut seen: BTreeMap<(&[bool], Label), u64> = BTreeMap::new();
        for (row, &label) in data.rows.iter().zip(&data.labels) {
            *seen.entry((*row, label)).or_default() += 1;
        }
        let mut columns = vec![Vec::new(); data.width];
        let mut labels = Vec::with_capacity(seen.len());
        let mut counts = Vec::with_capacity(seen.len());
        for (g, ((row, label), n)) in seen.into_iter().enumerate() {
            for (f, &bit) in row.iter().enumerate() {
                if bit {
                    columns[f].push(g);
                }
            }
            labels.push(label);
            counts.push(n);
        }
        Self {
            columns,
            labels,
            counts,
            width: data.width,
        }
    }

    fn len(&self) -> usize {
        self.labels.len()
    }
}

/// One boosting run restricted to the groups with `train[g]` set.
struct Booster<'a> {
    groups: &'a Groups,
    /// Per-group share of the training set; zero outside it.
    share: Vec<f64>,
    eta: Vec<f64>,
    intercept: f64,
    weights: Vec<f64>,
}

impl<'a> Booster<'a> {
    fn new(groups: &'a Groups, train: &[bool]) -> Self {
        let total: u64 = (0..groups.len()).filter(|&g| train[g]).map(|g| groups.counts[g]).sum();
        let share = (0..groups.len())
            .map(|g| {
                if train[g] {
                    groups.counts[g] as f64 / total as f64
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            groups,
            share,
            eta: vec![0.0; groups.len()],
            intercept: 0.0,
            weights: vec![0.0; groups.width],
        }
    }

    /// Adds one regressor; updates the linear score of every group.
    fn step(&mut self) -> Result<(), LearnError> {
        let g = self.groups;
        let n = g.len();
        let (mut w_all, mut wz_all, mut wzz_all) = (0.0, 0.0, 0.0);
        let mut w = vec![0.0; n];
        let mut wz = vec![0.0; n];
        for i in 0..n {
            if self.share[i] == 0.0 {
                continue;
            }
            let p = sigmoid(self.eta[i]);
            let y = if g.labels[i] == Label::Suspicious { 1.0 } else { 0.0 };
            let weight = (p * (1.0 - p)).max(MIN_WEIGHT);
            let z = ((y - p) / weight).clamp(-MAX_RESPONSE, MAX_RESPONSE);
            if !z.is_finite() {
                return Err(LearnError::NoConvergence);
            }
            w[i] = self.share[i] * weight;
            wz[i] = w[i] * z;
            w_all += w[i];
            wz_all += wz[i];
            wzz_all += wz[i] * z;
        }

        // Intercept-only fit as the baseline for constant columns.
        let mut best = (wzz_all - wz_all * wz_all / w_all, None, wz_all / w_all, 0.0);
        for (f, col) in g.columns.iter().enumerate() {
            let (mut w1, mut wz1) = (0.0, 0.0);
            for &i in col {
                w1 += w[i];
                wz1 += wz[i];
            }
            let (w0, wz0) = (w_all - w1, wz_all - wz1);
            if w1 <= 0.0 || w0 <= 0.0 {
                continue;
            }
            let sse = wzz_all - wz1 * wz1 / w1 - wz0 * wz0 / w0;
            if best.1.is_none() || sse < best.0 {
                let a = wz0 / w0;
                best = (sse, Some(f), a, wz1 / w1 - a);
            }
        }
        let (_, feature, a, b) = best;
        if !(a.is_finite() && b.is_finite()) {
            return Err(LearnError::NoConvergence);
        }
        self.intercept += a;
        for e in &mut self.eta {
            *e += a;
        }
        if let Some(f) = feature {
            self.weights[f] += b;
            for &i in &g.columns[f] {
                self.eta[i] += b;
            }
        }
        Ok(())
    }

    /// Misclassified instances among groups with `test[g]` set.
    fn errors(&self, test: &[bool]) -> u64 {
        (0..self.groups.len())
            .filter(|&i| test[i])
            .filter(|&i| {
                let predicted = if self.eta[i] > 0.0 { Label::Suspicious } else { Label::Benign };
                predicted != self.groups.labels[i]
            })
            .map(|i| self.groups.counts[i])
            .sum()
    }

    fn into_model(self, iterations_used: usize) -> SimpleLogisticModel {
        let weights = self
            .weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(feature, &weight)| FeatureWeight { feature, weight })
            .collect();
        SimpleLogisticModel {
            intercept: self.intercept,
            weights,
            iterations_used,
        }
    }
}

/// Stratified fold index per group. Groups are shuffled, stably sorted by
/// class and dealt out round-robin.
fn group_folds(groups: &Groups, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.sort_by_key(|&g| groups.labels[g]);
    let mut fold = vec![0; groups.len()];
    for (pos, g) in order.into_iter().enumerate() {
        fold[g] = pos % k;
    }
    fold
}

/// Summed held-out errors after each of `1..=max_iter` rounds.
fn cv_errors(groups: &Groups, opts: &LogisticOptions, seed: u64) -> Result<Vec<u64>, LearnError> {
    let k = opts.cv_folds.min(groups.len()).max(2);
    let folds = group_folds(groups, k, seed);
    let mut total = vec![0u64; opts.max_iter];
    for fold in 0..k {
        let test: Vec<bool> = folds.iter().map(|&f| f == fold).collect();
        let train: Vec<bool> = test.iter().map(|t| !t).collect();
        let mut booster = Booster::new(groups, &train);
        let (mut best, mut best_at) = (u64::MAX, 0);
        let mut last = 0;
        for (it, sum) in total.iter_mut().enumerate() {
            if it - best_at > opts.heuristic_stop && best != u64::MAX {
                *sum += last;
                continue;
            }
            booster.step()?;
            last = booster.errors(&test);
            if last < best {
                (best, best_at) = (last, it);
            }
            *sum += last;
        }
    }
    Ok(total)
}

pub(crate) fn fit(data: &Instances, opts: &LogisticOptions, seed: u64) -> Result<SimpleLogisticModel, LearnError> {
    let groups = Groups::new(data);
    let max_iter = opts.max_iter.max(1);
    let opts = LogisticOptions { max_iter, ..opts.clone() };
    let errors = cv_errors(&groups, &opts, seed)?;
    let mut best_iter = 1;
    for (it, &e) in errors.iter().enumerate() {
        if e < errors[best_iter - 1] {
            best_iter = it + 1;
        }
    }
    let mut booster = Booster::new(&groups, &vec![true; groups.len()]);
    for _ in 0..best_iter {
        booster.step()?;
    }
    Ok(booster.into_model(best_iter))
}

pub fn train_simple_logistic(m: &SampleMatrix, opts: &TrainOptions) -> Result<TrainedModel, LearnError> {
    let data = Instances::new(m)?;
    Ok(TrainedModel::new(m, fit(&data, &opts.logistic, opts.seed)?.into()))
}
