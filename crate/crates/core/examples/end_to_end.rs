//! The whole batch workflow through the command-line front end: generate
//! packages, extract, train, classify and evaluate.
//!
//! ```text
//! cargo run --example end_to_end -- [work_dir]
//! ```

use std::path::PathBuf;

use droidscan::cli::run_with;
use droidscan::features::FeatureCatalog;
use droidscan::synth::{write_keyword_corpus, CorpusSpec};

fn step(args: &[&str]) {
    println!("$ droidscan {}", args.join(" "));
    let mut out = Vec::new();
    let code = run_with(std::iter::once("droidscan").chain(args.iter().copied()), &mut out);
    let text = String::from_utf8_lossy(&out);
    for line in text.lines().take(12) {
        println!("  {line}");
    }
    assert_eq!(code, 0, "step failed");
}

fn main() -> std::io::Result<()> {
    let work = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("droidscan-demo"));
    let apks = work.join("apks");
    write_keyword_corpus(&apks, &CorpusSpec::default(), &FeatureCatalog::default_catalog())?;
    let p = |name: &str| work.join(name).display().to_string();
    let apk_dir = apks.display().to_string();
    let labels = apks.join("labels.csv").display().to_string();

    step(&["extract", "--apk-dir", &apk_dir, "--labels", &labels, "--out", &p("matrix.csv")]);
    step(&["train", "--matrix", &p("matrix.csv"), "--out-dir", &p("models")]);
    step(&["classify", "--models", &p("models"), "--apk", &apk_dir, "--scheme", "prod"]);
    step(&["evaluate", "--matrix", &p("matrix.csv"), "--report", &p("report.json")]);
    println!("outputs in {}", work.display());
    Ok(())
}
