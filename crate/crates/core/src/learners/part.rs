//! PART: a decision list read off a sequence of partial C4.5 trees.

use serde::{Deserialize, Serialize};

use super::c45::{best_split, entropy, leaf_estimate, partition, PRUNE_SLACK};
use super::{ClassCounts, Instances, LearnError, Posterior, TrainOptions, TrainedModel, TreeOptions};
use crate::features::SampleMatrix;

/// One literal: feature `feature` must equal `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: usize,
    pub value: bool,
}

impl Condition {
    pub fn matches(&self, bits: &[bool]) -> bool {
        bits[self.feature] == self.value
    }
}

pub(crate) fn all_match(conditions: &[Condition], bits: &[bool]) -> bool {
    conditions.iter().all(|c| c.matches(bits))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub counts: ClassCounts,
}

/// Ordered rules evaluated first-match; unmatched vectors fall to the default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleListModel {
    pub rules: Vec<Rule>,
    pub default_counts: ClassCounts,
}

impl RuleListModel {
    /// Index of the first matching rule, `None` for the default.
    pub fn matching_rule(&self, bits: &[bool]) -> Option<usize> {
        self.rules.iter().position(|r| all_match(&r.conditions, bits))
    }

    pub fn predict(&self, bits: &[bool]) -> Posterior {
        let counts = match self.matching_rule(bits) {
            Some(i) => self.rules[i].counts,
            None => self.default_counts,
        };
        Posterior::laplace(counts)
    }

    pub(crate) fn validate(&self, width: usize) -> Result<(), String> {
        for (i, rule) in self.rules.iter().enumerate() {
            if let Some(c) = rule.conditions.iter().find(|c| c.feature >= width) {
                return Err(format!("rule {i} tests feature {} >= {width}", c.feature));
            }
        }
        Ok(())
    }
}

enum Partial {
    Leaf(ClassCounts),
    Split {
        feature: usize,
        /// `None` marks a branch left unexpanded.
        children: [Option<Box<Partial>>; 2],
    },
}

/// Grows a partial tree. Subsets are expanded in order of increasing
/// entropy; expansion stops at the first one that does not collapse into
/// a leaf. Only fully expanded nodes whose children are all leaves are
/// considered for pruning.
fn grow(data: &Instances, idx: &[usize], opts: &TreeOptions) -> Partial {
    let counts = data.counts(idx);
    let Some(feature) = best_split(data, idx, opts.min_leaf) else {
        return Partial::Leaf(counts);
    };
    let subsets = partition(data, idx, feature);
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        entropy(data.counts(&subsets[a])).total_cmp(&entropy(data.counts(&subsets[b])))
    });

    let mut children: [Option<Box<Partial>>; 2] = [None, None];
    let mut child_estimate = 0.0;
    let mut all_leaves = true;
    for side in order {
        let child = grow(data, &subsets[side], opts);
        match &child {
            Partial::Leaf(c) => child_estimate += leaf_estimate(*c, opts.confidence),
            Partial::Split { .. } => all_leaves = false,
        }
        children[side] = Some(Box::new(child));
        if !all_leaves {
            break;
        }
    }
    if all_leaves && leaf_estimate(counts, opts.confidence) <= child_estimate + PRUNE_SLACK {
        return Partial::Leaf(counts);
    }
    Partial::Split { feature, children }
}

/// Path and counts of the expanded leaf with the most instances; the
/// first one in depth-first order wins ties.
fn best_leaf(node: &Partial, path: &mut Vec<Condition>, best: &mut Option<(Vec<Condition>, ClassCounts)>) {
    match node {
        Partial::Leaf(counts) => {
            if best.as_ref().is_none_or(|(_, b)| counts.total() > b.total()) {
                *best = Some((path.clone(), *counts));
            }
        }
        Partial::Split { feature, children } => {
            for (value, child) in [false, true].into_iter().zip(children) {
                if let Some(child) = child {
                    path.push(Condition {
                        feature: *feature,
                        value,
                    });
                    best_leaf(child, path, best);
                    path.pop();
                }
            }
        }
    }
}

pub(crate) fn fit(data: &Instances, opts: &TreeOptions) -> RuleListModel {
    let mut remaining: Vec<usize> = (0..data.len()).collect();
    let mut rules = Vec::new();
    let mut default_counts = None;
    while !remaining.is_empty() {
        let tree = grow(data, &remaining, opts);
        let mut best = None;
        best_leaf(&tree, &mut Vec::new(), &mut best);
        let (conditions, counts) = best.expect("a partial tree has at least one expanded leaf");
        if conditions.is_empty() {
            default_counts = Some(counts);
            break;
        }
        remaining.retain(|&i| !all_match(&conditions, data.rows[i]));
        rules.push(Rule { conditions, counts });
    }
    RuleListModel {
        rules,
        default_counts: default_counts.unwrap_or_else(|| data.counts(&(0..data.len()).collect::<Vec<_>>())),
    }
}

pub fn train_part(m: &SampleMatrix, opts: &TrainOptions) -> Result<TrainedModel, LearnError> {
    let data = Instances::new(m)?;
    Ok(TrainedModel::new(m, fit(&data, &opts.tree).into()))
}
