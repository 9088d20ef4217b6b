//! Static Android malware screening with keyword features and a committee
//! of classifiers.
//!
//! The pipeline runs APK ingest ([`apk`]), binary feature vectors
//! ([`features`]), five base learners ([`learners`]), posterior
//! combination ([`ensemble`]) and stratified cross-validation ([`eval`]).
//! [`synth`] builds packages and datasets for tests and examples.

pub mod apk;
pub mod cli;
pub mod ensemble;
pub mod eval;
pub mod features;
pub mod learners;
pub mod synth;
