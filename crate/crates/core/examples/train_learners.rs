//! Trains the five base classifiers on a rule-generated dataset and shows
//! what each one learned.

use droidscan::learners::{train, Algorithm, ModelPayload, TrainOptions};
use droidscan::synth::{rule_corpus, RuleSpec};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let (matrix, list) = rule_corpus(seed, &RuleSpec::default());
    println!("target decision list:");
    for r in &list.rules {
        let conds: Vec<String> = r.conditions.iter().map(|c| format!("f{}={}", c.feature, c.value as u8)).collect();
        println!("  if {} then {}", conds.join(" and "), r.class);
    }
    println!("  else {}\n", list.default);

    let opts = TrainOptions::with_seed(seed);
    for algorithm in Algorithm::ALL {
        let model = train(algorithm, &matrix, &opts).expect("both classes present");
        let correct = matrix
            .samples()
            .iter()
            .filter(|s| model.predict(&s.vector.bits).unwrap().decision() == s.label)
            .count();
        println!(
            "{:<6} training accuracy {:.3}  {}",
            algorithm.display_name(),
            correct as f64 / matrix.len() as f64,
            model.summary()
        );
        if let ModelPayload::Part(rules) = &model.payload {
            for r in &rules.rules {
                let conds: Vec<String> = r.conditions.iter().map(|c| format!("f{}={}", c.feature, c.value as u8)).collect();
                println!("         {} -> {} ({}/{})", conds.join(" and "), r.counts.majority(), r.counts.get(r.counts.majority()), r.counts.total());
            }
            println!("         otherwise -> {}", rules.default_counts.majority());
        }
    }
}
