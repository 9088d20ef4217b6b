//! Generators for synthetic packages and datasets: DEX images, binary
//! manifests, whole APKs, labelled keyword corpora and rule-labelled
//! feature matrices.

pub mod apk;
pub mod axml;
pub mod corpus;
pub mod dex;
pub mod rules;

pub use apk::{ApkBuilder, PlantedApp};
pub use axml::ManifestBuilder;
pub use corpus::{keyword_corpus, write_keyword_corpus, CorpusSpec, SyntheticApp, CONCEPT_PAIRS};
pub use dex::{build_dex, encode_mutf8};
pub use rules::{anonymous_catalog, is_linearly_separable, rule_corpus, DecisionList, ListRule, RuleSpec};
