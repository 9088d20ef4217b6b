//! Untrained fusion of the base classifiers' posteriors.
//!
//! Every scheme compares a suspicious-side quantity against its benign
//! counterpart and calls the sample suspicious only on a strict win.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::features::Label;
use crate::learners::{Algorithm, Posterior};

/// One posterior per base classifier, in [`Algorithm::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSet(pub [Posterior; 5]);

impl PosteriorSet {
    pub fn get(&self, algorithm: Algorithm) -> Posterior {
        let i = Algorithm::ALL.iter().position(|&a| a == algorithm).expect("known algorithm");
        self.0[i]
    }

    pub fn as_slice(&self) -> &[Posterior] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Avg,
    Prod,
    Max,
    Vote,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Avg, Scheme::Prod, Scheme::Max, Scheme::Vote];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Avg => "avg",
            Self::Prod => "prod",
            Self::Max => "max",
            Self::Vote => "vote",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Self::Avg => "AvgProb",
            Self::Prod => "ProdProb",
            Self::Max => "MaxProb",
            Self::Vote => "MVote",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|x| x.tag() == s)
            .ok_or_else(|| format!("unknown scheme {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleVerdict {
    pub decision: Label,
    /// Ranking score; above 0.5 exactly when the decision is suspicious,
    /// except where a tie forced benign.
    pub score_sus: f64,
    pub scheme: Scheme,
    pub per_classifier: PosteriorSet,
}

pub fn combine(ps: &PosteriorSet, scheme: Scheme) -> EnsembleVerdict {
    let (decision, score_sus) = combine_slice(&ps.0, scheme);
    EnsembleVerdict {
        decision,
        score_sus,
        scheme,
        per_classifier: *ps,
    }
}

fn verdict(suspicious: bool) -> Label {
    if suspicious {
        Label::Suspicious
    } else {
        Label::Benign
    }
}

/// Values in ascending order so that sums and products do not depend on
/// committee order.
fn sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v
}

fn product(ps: &[Posterior]) -> (Label, f64) {
    let sus = sorted(ps.iter().map(|p| p.p_sus));
    let ben = sorted(ps.iter().map(|p| p.p_ben));
    let (prod_sus, prod_ben): (f64, f64) = (sus.iter().product(), ben.iter().product());
    let underflow = |x: f64, factors: &[f64]| !x.is_normal() && factors.iter().all(|&f| f > 0.0);
    if underflow(prod_sus, &sus) || underflow(prod_ben, &ben) {
        // every factor is positive, so compare in log-space
        let log_sus: f64 = sus.iter().map(|p| p.ln()).sum();
        let log_ben: f64 = ben.iter().map(|p| p.ln()).sum();
        return (verdict(log_sus > log_ben), 1.0 / (1.0 + (log_ben - log_sus).exp()));
    }
    if prod_sus == 0.0 && prod_ben == 0.0 {
        return (Label::Benign, 0.5);
    }
    (verdict(prod_sus > prod_ben), prod_sus / (prod_sus + prod_ben))
}

/// Fuses any non-empty committee. Returns the decision and its score.
pub fn combine_slice(ps: &[Posterior], scheme: Scheme) -> (Label, f64) {
    assert!(!ps.is_empty(), "empty committee");
    let n = ps.len() as f64;
    match scheme {
        Scheme::Avg => {
            let mean_sus = sorted(ps.iter().map(|p| p.p_sus)).iter().sum::<f64>() / n;
            let mean_ben = sorted(ps.iter().map(|p| p.p_ben)).iter().sum::<f64>() / n;
            (verdict(mean_sus > mean_ben), mean_sus)
        }
        Scheme::Prod => product(ps),
        Scheme::Max => {
            let max_sus = ps.iter().map(|p| p.p_sus).fold(f64::NEG_INFINITY, f64::max);
            let max_ben = ps.iter().map(|p| p.p_ben).fold(f64::NEG_INFINITY, f64::max);
            (verdict(max_sus > max_ben), max_sus / (max_sus + max_ben))
        }
        Scheme::Vote => {
            let sus_votes = ps.iter().filter(|p| p.decision() == Label::Suspicious).count();
            (verdict(2 * sus_votes > ps.len()), sus_votes as f64 / n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(p_sus: [f64; 5]) -> PosteriorSet {
        PosteriorSet(p_sus.map(Posterior::from_sus))
    }

    #[test]
    fn average_example() {
        let v = combine(&set([0.9, 0.8, 0.7, 0.6, 0.5]), Scheme::Avg);
        assert_eq!(v.decision, Label::Suspicious);
        assert!((v.score_sus - 0.7).abs() < 1e-12);
    }

    #[test]
    fn vote_example() {
        let v = combine(&set([0.9, 0.8, 0.3, 0.2, 0.1]), Scheme::Vote);
        assert_eq!(v.decision, Label::Benign);
        assert!((v.score_sus - 0.4).abs() < 1e-15);
    }

    #[test]
    fn max_example() {
        let v = combine(&set([0.95, 0.2, 0.2, 0.2, 0.2]), Scheme::Max);
        assert_eq!(v.decision, Label::Suspicious);
        assert!((v.score_sus - 0.95 / 1.75).abs() < 1e-12);
    }

    #[test]
    fn product_example() {
        let v = combine(&set([0.9, 0.9, 0.9, 0.9, 0.1]), Scheme::Prod);
        assert_eq!(v.decision, Label::Suspicious);
        let (s, b) = (0.9f64.powi(4) * 0.1, 0.1f64.powi(4) * 0.9);
        assert!((v.score_sus - s / (s + b)).abs() < 1e-12);
    }

    #[test]
    fn unanimity_and_ties() {
        for scheme in Scheme::ALL {
            assert_eq!(combine(&set([1.0; 5]), scheme).decision, Label::Suspicious);
            let even = combine(&set([0.5; 5]), scheme);
            assert_eq!(even.decision, Label::Benign);
            assert!(even.score_sus <= 0.5);
        }
    }

    #[test]
    fn product_of_zeros_is_even() {
        let (d, s) = combine_slice(&[Posterior::from_sus(0.0), Posterior::from_sus(1.0)], Scheme::Prod);
        assert_eq!((d, s), (Label::Benign, 0.5));
    }

    #[test]
    fn product_survives_underflow() {
        let ps = vec![Posterior::from_sus(1e-80); 5];
        let (d, s) = combine_slice(&ps, Scheme::Prod);
        assert_eq!(d, Label::Benign);
        assert!((0.0..1e-300).contains(&s));
        let ps = vec![Posterior::from_sus(1.0 - 1e-16); 20];
        assert_eq!(combine_slice(&ps, Scheme::Prod).0, Label::Suspicious);
    }

    #[test]
    fn single_member_committee() {
        for p in [0.2, 0.5, 0.7] {
            let one = [Posterior::from_sus(p)];
            for scheme in Scheme::ALL {
                assert_eq!(combine_slice(&one, scheme).0, one[0].decision());
            }
        }
    }

    proptest! {
        #[test]
        fn permutation_invariant(p in prop::array::uniform5(0.0f64..=1.0), rot in 0usize..5) {
            let mut q = p;
            q.rotate_left(rot);
            q.swap(0, 4);
            for scheme in Scheme::ALL {
                let a = combine(&set(p), scheme);
                let b = combine(&set(q), scheme);
                prop_assert_eq!(a.decision, b.decision);
                prop_assert_eq!(a.score_sus, b.score_sus);
            }
        }

        #[test]
        fn avg_is_mean_above_half(p in prop::array::uniform5(0.0f64..=1.0)) {
            let v = combine(&set(p), Scheme::Avg);
            prop_assert_eq!(v.decision == Label::Suspicious, v.score_sus > 0.5);
        }
    }
}
