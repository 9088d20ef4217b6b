//! Fuses one committee's posteriors with each of the four schemes.
//!
//! ```text
//! cargo run --example combine_posteriors -- 0.9 0.8 0.3 0.2 0.1
//! ```

use droidscan::ensemble::{combine, PosteriorSet, Scheme};
use droidscan::learners::{Algorithm, Posterior};

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("probability")).collect();
    let p_sus: [f64; 5] = args.try_into().unwrap_or([0.9, 0.8, 0.3, 0.2, 0.1]);
    let set = PosteriorSet(p_sus.map(Posterior::from_sus));

    for (a, p) in Algorithm::ALL.iter().zip(set.as_slice()) {
        println!("{:<6} P(sus) {:.3}  -> {}", a.display_name(), p.p_sus, p.decision());
    }
    println!();
    for scheme in Scheme::ALL {
        let v = combine(&set, scheme);
        println!("{:<9} score {:.4}  -> {}", scheme.display_name(), v.score_sus, v.decision);
    }
}
