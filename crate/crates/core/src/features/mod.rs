//! Keyword feature space: catalog, binary vectors and labelled matrices.

mod catalog;
mod matrix;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::apk::EvidenceBundle;

pub use catalog::{Category, Feature, FeatureCatalog};
pub use matrix::SampleMatrix;

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("duplicate keyword {0:?}")]
    DuplicateKeyword(String),
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("catalog has no features")]
    EmptyCatalog,
    #[error("malformed catalog entry {0:?}")]
    MalformedLine(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("line {line}: bad value {value:?}")]
    BadValue { line: usize, value: String },
    #[error("line {line}: bad label {value:?}")]
    BadLabel { line: usize, value: String },
    #[error("duplicate sample id {0:?}")]
    DuplicateSampleId(String),
    #[error("invalid sample id {0:?}")]
    InvalidSampleId(String),
    #[error("sample {id:?} has {got} bits, catalog has {expected}")]
    LengthMismatch {
        id: String,
        expected: usize,
        got: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// The two classes. Ordering puts benign first, which is also the
/// tie-break preference everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Benign,
    Suspicious,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Benign, Label::Suspicious];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Benign => "benign",
            Self::Suspicious => "suspicious",
        }
    }

    pub fn other(self) -> Self {
        match self {
            Self::Benign => Self::Suspicious,
            Self::Suspicious => Self::Benign,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "benign" => Ok(Self::Benign),
            "suspicious" => Ok(Self::Suspicious),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub sample_id: String,
    pub bits: Vec<bool>,
}

impl FeatureVector {
    pub fn new(sample_id: impl Into<String>, bits: Vec<bool>) -> Self {
        Self {
            sample_id: sample_id.into(),
            bits,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledSample {
    pub vector: FeatureVector,
    pub label: Label,
}

impl LabelledSample {
    pub fn new(vector: FeatureVector, label: Label) -> Self {
        Self { vector, label }
    }
}

/// Sets bit `i` when feature `i` is detected in the evidence.
///
/// Permissions must match a declared permission exactly. API and command
/// keywords match as case-sensitive substrings of any DEX or raw string.
pub fn vectorize(
    sample_id: impl Into<String>,
    evidence: &EvidenceBundle,
    catalog: &FeatureCatalog,
) -> FeatureVector {
    let bits = catalog
        .features()
        .iter()
        .map(|f| match f.category {
            Category::Permission => evidence.manifest_permissions.contains(&f.keyword),
            Category::Api | Category::Command => evidence
                .dex_strings
                .iter()
                .chain(&evidence.raw_strings)
                .any(|s| s.contains(f.keyword.as_str())),
        })
        .collect();
    FeatureVector::new(sample_id, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn small_catalog() -> FeatureCatalog {
        FeatureCatalog::parse("api:getDeviceId\nperm:SEND_SMS\ncmd:chmod\n").unwrap()
    }

    #[test]
    fn direct_membership() {
        let ev = EvidenceBundle {
            dex_strings: set(&["getDeviceId"]),
            manifest_permissions: set(&["SEND_SMS"]),
            ..Default::default()
        };
        let v = vectorize("s", &ev, &small_catalog());
        assert_eq!(v.bits, vec![true, true, false]);
    }

    #[test]
    fn empty_evidence_is_all_zero() {
        let v = vectorize("s", &EvidenceBundle::default(), &small_catalog());
        assert_eq!(v.bits, vec![false; 3]);
    }

    #[test]
    fn command_substring_in_raw_strings() {
        let catalog = FeatureCatalog::parse("cmd:.apk\nperm:RECEIVE_SMS\n").unwrap();
        let ev = EvidenceBundle {
            raw_strings: set(&["assets/payload.apk"]),
            // prefix collision must not count
            manifest_permissions: set(&["RECEIVE_SMS_EXTRA"]),
            ..Default::default()
        };
        assert_eq!(vectorize("s", &ev, &catalog).bits, vec![true, false]);
    }

    #[test]
    fn permissions_ignore_string_channels() {
        let ev = EvidenceBundle {
            dex_strings: set(&["SEND_SMS"]),
            raw_strings: set(&["android.permission.SEND_SMS"]),
            ..Default::default()
        };
        assert_eq!(vectorize("s", &ev, &small_catalog()).bits, vec![false; 3]);
    }

    #[test]
    fn label_order_prefers_benign() {
        assert!(Label::Benign < Label::Suspicious);
        assert_eq!("suspicious".parse::<Label>(), Ok(Label::Suspicious));
        assert!("Benign".parse::<Label>().is_err());
    }
}
