use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::features::{Label, SampleMatrix};

/// Assignment of every sample to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified folds: each class is shuffled with the seed, the classes are
/// laid end to end (benign first) and positions are dealt round-robin.
/// Fold sizes then differ by at most one overall and within each class.
pub fn make_folds(m: &SampleMatrix, k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k < 2 || m.len() < k {
        return Err(EvalError::TooFewSamples {
            k,
            samples: m.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; m.len()];
    let mut position = 0;
    for class in Label::ALL {
        let mut members: Vec<usize> = m
            .labels()
            .enumerate()
            .filter(|&(_, l)| l == class)
            .map(|(i, _)| i)
            .collect();
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = position % k;
            position += 1;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}
