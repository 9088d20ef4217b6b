//! C4.5 pieces shared by the decision tree and PART: gain-ratio split
//! selection over binary attributes and the pessimistic error estimate.

use statrs::distribution::{ContinuousCDF, Normal};

use super::{ClassCounts, Instances};

const MIN_GAIN: f64 = 1e-10;

fn entropy_of(parts: &[f64]) -> f64 {
    let total: f64 = parts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    parts
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| {
            let q = p / total;
            -q * q.log2()
        })
        .sum()
}

pub(crate) fn entropy(c: ClassCounts) -> f64 {
    entropy_of(&[c.benign as f64, c.suspicious as f64])
}

/// Partitions `idx` by the value of `feature`.
pub(crate) fn partition(data: &Instances, idx: &[usize], feature: usize) -> [Vec<usize>; 2] {
    let (ones, zeros): (Vec<usize>, Vec<usize>) =
        idx.iter().partition(|&&i| data.rows[i][feature]);
    [zeros, ones]
}

struct Candidate {
    feature: usize,
    gain: f64,
    ratio: f64,
}

/// Picks the split feature for the instances in `idx`.
///
/// Each side of the split must hold at least `min_leaf` instances and the
/// information gain must be positive. Among such candidates, those with at
/// least average gain compete on gain ratio; ties go to the lower index.
pub(crate) fn best_split(data: &Instances, idx: &[usize], min_leaf: usize) -> Option<usize> {
    let parent = data.counts(idx);
    let n = parent.total() as f64;
    if parent.is_pure() || idx.len() < 2 * min_leaf.max(1) {
        return None;
    }
    let parent_entropy = entropy(parent);

    let mut ones = vec![ClassCounts::default(); data.width];
    for &i in idx {
        let label = data.labels[i];
        for (f, &bit) in data.rows[i].iter().enumerate() {
            if bit {
                ones[f].add(label);
            }
        }
    }

    let candidates: Vec<Candidate> = ones
        .iter()
        .enumerate()
        .filter_map(|(feature, &one)| {
            let zero = ClassCounts::new(parent.benign - one.benign, parent.suspicious - one.suspicious);
            let (n0, n1) = (zero.total() as f64, one.total() as f64);
            if (zero.total() as usize) < min_leaf || (one.total() as usize) < min_leaf {
                return None;
            }
            let gain = parent_entropy - (n0 / n) * entropy(zero) - (n1 / n) * entropy(one);
            if gain <= MIN_GAIN {
                return None;
            }
            let split_info = entropy_of(&[n0, n1]);
            Some(Candidate {
                feature,
                gain,
                ratio: gain / split_info,
            })
        })
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let mean_gain = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
    let mut best: Option<&Candidate> = None;
    for c in candidates.iter().filter(|c| c.gain >= mean_gain - MIN_GAIN) {
        if best.is_none_or(|b| c.ratio > b.ratio) {
            best = Some(c);
        }
    }
    best.map(|c| c.feature)
}

/// Upper confidence bound on the number of errors at a node with `n`
/// instances and `e` observed errors, minus `e` itself.
pub(crate) fn added_errors(n: f64, e: f64, confidence: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if e < 1.0 {
        let base = n * (1.0 - confidence.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (added_errors(n, 1.0, confidence) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - confidence);
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt())
        / (1.0 + z * z / n);
    r * n - e
}

/// Pessimistic error estimate for a leaf holding `counts`.
pub(crate) fn leaf_estimate(counts: ClassCounts, confidence: f64) -> f64 {
    let e = counts.errors() as f64;
    e + added_errors(counts.total() as f64, e, confidence)
}

/// Slack in favour of collapsing a subtree into a leaf.
pub(crate) const PRUNE_SLACK: f64 = 0.1;
