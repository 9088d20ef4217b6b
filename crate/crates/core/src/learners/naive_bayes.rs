//! Bernoulli naive Bayes with add-one smoothing.

use serde::{Deserialize, Serialize};

use super::{Instances, LearnError, Posterior, TrainedModel};
use crate::features::{Label, SampleMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub prior_sus: f64,
    pub prior_ben: f64,
    /// `P(bit = 1 | suspicious)` per feature.
    pub cond_sus: Vec<f64>,
    /// `P(bit = 1 | benign)` per feature.
    pub cond_ben: Vec<f64>,
}

impl NaiveBayesModel {
    pub fn predict(&self, bits: &[bool]) -> Posterior {
        let log_lik = |prior: f64, cond: &[f64]| -> f64 {
            prior.ln()
                + bits
                    .iter()
                    .zip(cond)
                    .map(|(&b, &p)| if b { p.ln() } else { (1.0 - p).ln() })
                    .sum::<f64>()
        };
        let l_sus = log_lik(self.prior_sus, &self.cond_sus);
        let l_ben = log_lik(self.prior_ben, &self.cond_ben);
        Posterior::from_sus(1.0 / (1.0 + (l_ben - l_sus).exp()))
    }

    pub(crate) fn validate(&self, width: usize) -> Result<(), String> {
        if self.cond_sus.len() != width || self.cond_ben.len() != width {
            return Err(format!("conditional tables do not have {width} entries"));
        }
        let open = |p: &f64| *p > 0.0 && *p < 1.0;
        if !open(&self.prior_sus) || !open(&self.prior_ben) {
            return Err("priors must lie in (0, 1)".into());
        }
        if !self.cond_sus.iter().chain(&self.cond_ben).all(open) {
            return Err("conditionals must lie in (0, 1)".into());
        }
        Ok(())
    }
}

pub(crate) fn fit(data: &Instances) -> NaiveBayesModel {
    let mut n = [0u64; 2];
    let mut ones = [vec![0u64; data.width], vec![0u64; data.width]];
    for (row, &label) in data.rows.iter().zip(&data.labels) {
        let c = label.index();
        n[c] += 1;
        for (f, &bit) in row.iter().enumerate() {
            if bit {
                ones[c][f] += 1;
            }
        }
    }
    let total = (n[0] + n[1]) as f64;
    let smooth = |c: usize| -> Vec<f64> {
        ones[c]
            .iter()
            .map(|&k| (k as f64 + 1.0) / (n[c] as f64 + 2.0))
            .collect()
    };
    NaiveBayesModel {
        prior_sus: n[Label::Suspicious.index()] as f64 / total,
        prior_ben: n[Label::Benign.index()] as f64 / total,
        cond_sus: smooth(Label::Suspicious.index()),
        cond_ben: smooth(Label::Benign.index()),
    }
}

pub fn train_naive_bayes(m: &SampleMatrix) -> Result<TrainedModel, LearnError> {
    let data = Instances::new(m)?;
    Ok(TrainedModel::new(m, fit(&data).into()))
}
