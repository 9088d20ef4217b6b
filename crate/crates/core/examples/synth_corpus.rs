//! Writes a labelled corpus of synthetic APKs.
//!
//! ```text
//! cargo run --example synth_corpus -- <out_dir> [apps] [seed]
//! ```

use droidscan::features::FeatureCatalog;
use droidscan::synth::{write_keyword_corpus, CorpusSpec};

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "corpus".into());
    let mut spec = CorpusSpec::default();
    if let Some(n) = args.next() {
        spec.apps = n.parse().expect("apps must be a number");
    }
    if let Some(seed) = args.next() {
        spec.seed = seed.parse().expect("seed must be a number");
    }
    let apps = write_keyword_corpus(&dir, &spec, &FeatureCatalog::default_catalog())?;
    let suspicious = apps.iter().filter(|a| a.label == droidscan::features::Label::Suspicious).count();
    println!("wrote {} packages ({suspicious} suspicious) and labels.csv to {dir}", apps.len());
    Ok(())
}
