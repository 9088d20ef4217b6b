//! RIDOR: a default rule refined by nested exceptions.

use serde::{Deserialize, Serialize};

use super::part::{all_match, Condition};
use super::{ClassCounts, Instances, LearnError, Posterior, RidorOptions, TrainOptions, TrainedModel};
use crate::features::{Label, SampleMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exception {
    pub conditions: Vec<Condition>,
    pub class: Label,
    /// Training instances this exception decides (not passed on to a nested one).
    pub counts: ClassCounts,
    pub exceptions: Vec<Exception>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RippleDownModel {
    pub default_class: Label,
    /// Training instances no exception claims.
    pub default_counts: ClassCounts,
    pub exceptions: Vec<Exception>,
}

/// Deepest matching node along first-match exception chains.
fn decide<'a>(exceptions: &'a [Exception], bits: &[bool]) -> Option<&'a Exception> {
    let hit = exceptions.iter().find(|e| all_match(&e.conditions, bits))?;
    Some(decide(&hit.exceptions, bits).unwrap_or(hit))
}

impl RippleDownModel {
    pub fn predict(&self, bits: &[bool]) -> Posterior {
        match decide(&self.exceptions, bits) {
            Some(e) => Posterior::laplace(e.counts),
            None => Posterior::laplace(self.default_counts),
        }
    }

    /// The class of the deciding rule, ignoring counts.
    pub fn rule_class(&self, bits: &[bool]) -> Label {
        decide(&self.exceptions, bits).map_or(self.default_class, |e| e.class)
    }

    pub fn exception_count(&self) -> usize {
        fn count(list: &[Exception]) -> usize {
            list.iter().map(|e| 1 + count(&e.exceptions)).sum()
        }
        count(&self.exceptions)
    }

    pub(crate) fn validate(&self, width: usize) -> Result<(), String> {
        fn walk(list: &[Exception], width: usize) -> Result<(), String> {
            for e in list {
                if e.conditions.is_empty() {
                    return Err("exception without conditions".into());
                }
                if let Some(c) = e.conditions.iter().find(|c| c.feature >= width) {
                    return Err(format!("exception tests feature {} >= {width}", c.feature));
                }
                walk(&e.exceptions, width)?;
            }
            Ok(())
        }
        walk(&self.exceptions, width)
    }
}

struct Grower<'a> {
    data: &'a Instances<'a>,
    max_depth: usize,
}

impl Grower<'_> {
    /// Best conjunction for flipping instances in `pool` from `class` to
    /// the other class, with its covered subset.
    ///
    /// The error of a candidate is (instances it wrongly flips + wrong
    /// instances it leaves alone) / instances it covers. The first literal
    /// is the best single one; further literals are added while they
    /// strictly lower the error.
    fn best_rule(&self, pool: &[usize], class: Label) -> Option<(Vec<Condition>, Vec<usize>)> {
        let data = self.data;
        let wrong_total = pool.iter().filter(|&&i| data.labels[i] != class).count() as f64;
        let mut covered: Vec<usize> = pool.to_vec();
        let mut conditions = Vec::new();
        let mut current = f64::INFINITY;
        loop {
            let (mut right_ones, mut wrong_ones) = (vec![0u32; data.width], vec![0u32; data.width]);
            let (mut right, mut wrong) = (0u32, 0u32);
            for &i in &covered {
                let is_wrong = data.labels[i] != class;
                if is_wrong {
                    wrong += 1;
                } else {
                    right += 1;
                }
                for (f, &bit) in data.rows[i].iter().enumerate() {
                    if bit {
                        if is_wrong {
                            wrong_ones[f] += 1;
                        } else {
                            right_ones[f] += 1;
                        }
                    }
                }
            }
            let mut best: Option<(f64, Condition)> = None;
            for f in 0..data.width {
                if conditions.iter().any(|c: &Condition| c.feature == f) {
                    continue;
                }
                for value in [true, false] {
                    let (r, w) = if value {
                        (right_ones[f], wrong_ones[f])
                    } else {
                        (right - right_ones[f], wrong - wrong_ones[f])
                    };
                    let n = r + w;
                    if n == 0 || n == right + wrong {
                        continue;
                    }
                    let error = (r as f64 + (wrong_total - w as f64)) / n as f64;
                    if best.is_none_or(|(e, _)| error < e) {
                        best = Some((error, Condition { feature: f, value }));
                    }
                }
            }
            let Some((error, literal)) = best else { break };
            if !conditions.is_empty() && error >= current {
                break;
            }
            current = error;
            conditions.push(literal);
            covered.retain(|&i| literal.matches(data.rows[i]));
        }
        if conditions.is_empty() {
            return None;
        }
        let corrected = covered.iter().filter(|&&i| data.labels[i] != class).count();
        let introduced = covered.len() - corrected;
        (corrected > introduced).then_some((conditions, covered))
    }

    /// Exceptions to a node predicting `class` over the instances it sees.
    fn grow(&self, idx: &[usize], class: Label, depth: usize) -> Vec<Exception> {
        let mut pool = idx.to_vec();
        let mut out = Vec::new();
        while depth < self.max_depth && pool.iter().any(|&i| self.data.labels[i] != class) {
            let Some((conditions, covered)) = self.best_rule(&pool, class) else {
                break;
            };
            let flipped = class.other();
            let exceptions = self.grow(&covered, flipped, depth + 1);
            pool.retain(|&i| !all_match(&conditions, self.data.rows[i]));
            out.push(Exception {
                conditions,
                class: flipped,
                counts: ClassCounts::default(),
                exceptions,
            });
        }
        out
    }
}

pub(crate) fn fit(data: &Instances, opts: &RidorOptions) -> RippleDownModel {
    let all: Vec<usize> = (0..data.len()).collect();
    let default_class = data.counts(&all).majority();
    let grower = Grower {
        data,
        max_depth: opts.max_depth,
    };
    let exceptions = grower.grow(&all, default_class, 0);
    let mut model = RippleDownModel {
        default_class,
        default_counts: ClassCounts::default(),
        exceptions,
    };
    fn route(list: &mut [Exception], bits: &[bool], label: Label) -> bool {
        let Some(hit) = list.iter_mut().find(|e| all_match(&e.conditions, bits)) else {
            return false;
        };
        if !route(&mut hit.exceptions, bits, label) {
            hit.counts.add(label);
        }
        true
    }
    for (bits, &label) in data.rows.iter().zip(&data.labels) {
        if !route(&mut model.exceptions, bits, label) {
            model.default_counts.add(label);
        }
    }
    model
}

pub fn train_ridor(m: &SampleMatrix, opts: &TrainOptions) -> Result<TrainedModel, LearnError> {
    let data = Instances::new(m)?;
    Ok(TrainedModel::new(m, fit(&data, &opts.ridor).into()))
}
