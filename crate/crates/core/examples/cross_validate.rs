//! Stratified 10-fold cross-validation of all classifiers and combiners
//! on a synthetic APK corpus.
//!
//! ```text
//! cargo run --release --example cross_validate -- [apps] [seed]
//! ```

use droidscan::apk::{open_bytes, EvidenceBundle, DEFAULT_MIN_STRING_LEN};
use droidscan::eval::{cross_validate, render_tables, CvConfig};
use droidscan::features::{vectorize, FeatureCatalog, LabelledSample, SampleMatrix};
use droidscan::synth::{keyword_corpus, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>());
    let mut spec = CorpusSpec::default();
    if let Some(n) = args.next() {
        spec.apps = n? as usize;
    }
    if let Some(seed) = args.next() {
        spec.seed = seed?;
    }

    let catalog = FeatureCatalog::default_catalog();
    let samples = keyword_corpus(&spec, &catalog)
        .iter()
        .map(|a| {
            let pkg = open_bytes(&a.file_name, &a.app.build())?;
            let ev = EvidenceBundle::collect(&pkg, DEFAULT_MIN_STRING_LEN);
            Ok(LabelledSample::new(vectorize(a.file_name.as_str(), &ev, &catalog), a.label))
        })
        .collect::<Result<Vec<_>, droidscan::apk::IngestError>>()?;
    let matrix = SampleMatrix::new(catalog, samples)?;

    let config = CvConfig { seed: spec.seed, ..CvConfig::default() };
    let report = cross_validate(&matrix, &config)?;
    println!("{} samples, {} folds, seed {}\n", report.samples, report.folds, report.seed);
    print!("{}", render_tables(&report));
    Ok(())
}
