//! Turns a directory of APKs into a labelled feature matrix.
//!
//! ```text
//! cargo run --example synth_corpus -- /tmp/corpus
//! cargo run --example vectorize -- /tmp/corpus /tmp/matrix.csv
//! ```
//!
//! Labels come from `labels.csv` in the same directory.

use std::collections::BTreeMap;
use std::path::Path;

use droidscan::apk::{open_package, EvidenceBundle, DEFAULT_MIN_STRING_LEN};
use droidscan::features::{vectorize, FeatureCatalog, Label, LabelledSample, SampleMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().ok_or("usage: vectorize <apk_dir> [out.csv]")?;
    let out = args.next().unwrap_or_else(|| "matrix.csv".into());
    let dir = Path::new(&dir);

    let labels: BTreeMap<String, Label> = std::fs::read_to_string(dir.join("labels.csv"))?
        .lines()
        .skip(1)
        .filter_map(|l| l.split_once(','))
        .map(|(id, l)| Ok((id.to_string(), l.parse::<Label>()?)))
        .collect::<Result<_, String>>()?;

    let catalog = FeatureCatalog::default_catalog();
    let mut samples = Vec::new();
    for (id, label) in &labels {
        let pkg = match open_package(dir.join(id)) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("skipping {id}: {e}");
                continue;
            }
        };
        let evidence = EvidenceBundle::collect(&pkg, DEFAULT_MIN_STRING_LEN);
        samples.push(LabelledSample::new(vectorize(id.as_str(), &evidence, &catalog), *label));
    }
    let matrix = SampleMatrix::new(catalog, samples)?;
    matrix.write(&out)?;

    let [benign, suspicious] = matrix.class_counts();
    println!("{} rows ({benign} benign, {suspicious} suspicious) x {} features -> {out}", matrix.len(), matrix.width());
    println!("catalog {}", matrix.catalog().version());
    let mut hits: Vec<(usize, String)> = matrix
        .catalog()
        .features()
        .iter()
        .enumerate()
        .map(|(i, f)| (matrix.samples().iter().filter(|s| s.vector.bits[i]).count(), f.to_string()))
        .filter(|(n, _)| *n > 0)
        .collect();
    hits.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    println!("most frequent features:");
    for (n, f) in hits.iter().take(10) {
        println!("  {n:>4}  {f}");
    }
    Ok(())
}
