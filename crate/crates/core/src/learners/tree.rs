//! C4.5-style decision tree over binary features.

use serde::{Deserialize, Serialize};

use super::c45::{best_split, leaf_estimate, partition, PRUNE_SLACK};
use super::{ClassCounts, Instances, LearnError, Posterior, TrainOptions, TrainedModel, TreeOptions};
use crate::features::SampleMatrix;

/// Flattened tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    pub nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        counts: ClassCounts,
    },
    Split {
        feature: usize,
        /// Index of the child for `bit = 0`.
        zero: usize,
        /// Index of the child for `bit = 1`.
        one: usize,
    },
}

impl DecisionTreeModel {
    /// Index of the leaf `bits` routes to.
    pub fn leaf_for(&self, bits: &[bool]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { .. } => return at,
                TreeNode::Split { feature, zero, one } => {
                    at = if bits[feature] { one } else { zero };
                }
            }
        }
    }

    pub fn predict(&self, bits: &[bool]) -> Posterior {
        match self.nodes[self.leaf_for(bits)] {
            TreeNode::Leaf { counts } => Posterior::laplace(counts),
            TreeNode::Split { .. } => unreachable!("leaf_for returns leaves"),
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { zero, one, .. } => 1 + walk(nodes, zero).max(walk(nodes, one)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Checks child indices point forward and every node is reachable once.
    pub(crate) fn validate(&self, width: usize) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("empty tree".into());
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let TreeNode::Split { feature, zero, one } = *node {
                if feature >= width {
                    return Err(format!("node {i} tests feature {feature} >= {width}"));
                }
                for child in [zero, one] {
                    if child <= i || child >= self.nodes.len() {
                        return Err(format!("node {i} has bad child {child}"));
                    }
                    parents[child] += 1;
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err("nodes are not a tree".into());
        }
        Ok(())
    }
}

enum Grown {
    Leaf(ClassCounts),
    Split {
        feature: usize,
        counts: ClassCounts,
        children: Box<[Grown; 2]>,
    },
}

impl Grown {
    fn counts(&self) -> ClassCounts {
        match self {
            Grown::Leaf(c) | Grown::Split { counts: c, .. } => *c,
        }
    }

    fn estimate(&self, confidence: f64) -> f64 {
        match self {
            Grown::Leaf(c) => leaf_estimate(*c, confidence),
            Grown::Split { children, .. } => {
                children.iter().map(|c| c.estimate(confidence)).sum()
            }
        }
    }
}

fn grow(data: &Instances, idx: &[usize], opts: &TreeOptions) -> Grown {
    let counts = data.counts(idx);
    let Some(feature) = best_split(data, idx, opts.min_leaf) else {
        return Grown::Leaf(counts);
    };
    let [zeros, ones] = partition(data, idx, feature);
    let children = Box::new([grow(data, &zeros, opts), grow(data, &ones, opts)]);
    let node = Grown::Split {
        feature,
        counts,
        children,
    };
    // subtree replacement, bottom-up since children are already pruned
    if leaf_estimate(counts, opts.confidence) <= node.estimate(opts.confidence) + PRUNE_SLACK {
        Grown::Leaf(counts)
    } else {
        node
    }
}

fn flatten(grown: Grown, nodes: &mut Vec<TreeNode>) -> usize {
    let at = nodes.len();
    match grown {
        Grown::Leaf(counts) => nodes.push(TreeNode::Leaf { counts }),
        Grown::Split {
            feature, children, ..
        } => {
            nodes.push(TreeNode::Split {
                feature,
                zero: 0,
                one: 0,
            });
            let [zero_child, one_child] = *children;
            let zero = flatten(zero_child, nodes);
            let one = flatten(one_child, nodes);
            nodes[at] = TreeNode::Split { feature, zero, one };
        }
    }
    at
}

pub(crate) fn fit(data: &Instances, opts: &TreeOptions) -> DecisionTreeModel {
    let idx: Vec<usize> = (0..data.len()).collect();
    let grown = grow(data, &idx, opts);
    debug_assert_eq!(grown.counts(), data.counts(&idx));
    let mut nodes = Vec::new();
    flatten(grown, &mut nodes);
    DecisionTreeModel { nodes }
}

pub fn train_decision_tree(m: &SampleMatrix, opts: &TrainOptions) -> Result<TrainedModel, LearnError> {
    let data = Instances::new(m)?;
    Ok(TrainedModel::new(m, fit(&data, &opts.tree).into()))
}
