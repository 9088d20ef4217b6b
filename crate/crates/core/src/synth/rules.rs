//! Noise-free datasets labelled by a random decision list.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::{Category, Feature, FeatureCatalog, FeatureVector, Label, LabelledSample, SampleMatrix};
use crate::learners::Condition;

#[derive(Debug, Clone, PartialEq)]
pub struct ListRule {
    pub conditions: Vec<Condition>,
    pub class: Label,
}

/// First matching rule wins; unmatched vectors get `default`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionList {
    pub rules: Vec<ListRule>,
    pub default: Label,
}

impl DecisionList {
    pub fn classify(&self, bits: &[bool]) -> Label {
        self.rules
            .iter()
            .find(|r| r.conditions.iter().all(|c| c.matches(bits)))
            .map_or(self.default, |r| r.class)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleSpec {
    pub features: usize,
    pub samples: usize,
    pub rules: usize,
    pub max_literals: usize,
    /// Each class must make up at least this share of the samples.
    pub min_class_share: f64,
    /// Only accept lists whose labelling of the whole cube is linearly separable.
    pub linearly_separable: bool,
}

impl Default for RuleSpec {
    fn default() -> Self {
        Self {
            features: 8,
            samples: 200,
            rules: 3,
            max_literals: 3,
            min_class_share: 0.25,
            linearly_separable: true,
        }
    }
}

/// Catalog of anonymous features `api:f0`, `api:f1`, ...
pub fn anonymous_catalog(width: usize) -> FeatureCatalog {
    FeatureCatalog::new((0..width).map(|i| Feature::new(Category::Api, format!("f{i}"))).collect())
        .expect("distinct keywords")
}

fn random_list(rng: &mut ChaCha8Rng, spec: &RuleSpec) -> DecisionList {
    let rules = (0..spec.rules)
        .map(|_| {
            let len = rng.random_range(1..=spec.max_literals.min(spec.features));
            let mut features: Vec<usize> = Vec::with_capacity(len);
            while features.len() < len {
                let f = rng.random_range(0..spec.features);
                if !features.contains(&f) {
                    features.push(f);
                }
            }
            let conditions = features
                .into_iter()
                .map(|feature| Condition {
                    feature,
                    value: rng.random_bool(0.5),
                })
                .collect();
            let class = if rng.random_bool(0.5) { Label::Suspicious } else { Label::Benign };
            ListRule { conditions, class }
        })
        .collect();
    let default = if rng.random_bool(0.5) { Label::Suspicious } else { Label::Benign };
    DecisionList { rules, default }
}

const PERCEPTRON_EPOCHS: usize = 1000;

/// Perceptron over all `2^width` vectors. Separable labellings are found
/// within the epoch cap for the widths used here; a labelling that is not
/// separated in time is treated as inseparable.
pub fn is_linearly_separable(list: &DecisionList, width: usize) -> bool {
    assert!(width <= 16, "cube too large");
    let points: Vec<(Vec<i64>, i64)> = (0..1usize << width)
        .map(|code| {
            let bits: Vec<bool> = (0..width).map(|f| code >> f & 1 == 1).collect();
            let y = if list.classify(&bits) == Label::Suspicious { 1 } else { -1 };
            let mut x: Vec<i64> = bits.iter().map(|&b| if b { 1 } else { -1 }).collect();
            x.push(1);
            (x, y)
        })
        .collect();
    let mut w = vec![0i64; width + 1];
    for _ in 0..PERCEPTRON_EPOCHS {
        let mut clean = true;
        for (x, y) in &points {
            let dot: i64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
            if dot * y <= 0 {
                clean = false;
                for (wi, xi) in w.iter_mut().zip(x) {
                    *wi += y * xi;
                }
            }
        }
        if clean {
            return true;
        }
    }
    false
}

/// Draws a decision list and uniform random vectors labelled by it,
/// redrawing both until the class balance (and, if asked, separability)
/// constraints hold.
pub fn rule_corpus(seed: u64, spec: &RuleSpec) -> (SampleMatrix, DecisionList) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_count = (spec.min_class_share * spec.samples as f64).ceil() as usize;
    loop {
        let list = random_list(&mut rng, spec);
        if spec.linearly_separable && !is_linearly_separable(&list, spec.features) {
            continue;
        }
        let rows: Vec<Vec<bool>> = (0..spec.samples)
            .map(|_| (0..spec.features).map(|_| rng.random_bool(0.5)).collect())
            .collect();
        let labels: Vec<Label> = rows.iter().map(|r| list.classify(r)).collect();
        let sus = labels.iter().filter(|&&l| l == Label::Suspicious).count();
        if sus < min_count || spec.samples - sus < min_count {
            continue;
        }
        let samples = rows
            .into_iter()
            .zip(labels)
            .enumerate()
            .map(|(i, (bits, label))| LabelledSample::new(FeatureVector::new(format!("r{i:03}"), bits), label))
            .collect();
        let matrix = SampleMatrix::new(anonymous_catalog(spec.features), samples).expect("valid matrix");
        return (matrix, list);
    }
}
