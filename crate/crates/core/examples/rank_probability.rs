//! Satisfaction probability of random systems of rank r when every block is
//! drawn from a set of at least 2n/3 values.

use bclique::f2::{random_allowed_sets, random_system, rank_probability_experiment, Layout};
use bclique::rng::stream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let layout = Layout::new(8, 4);
    for r in 0..=5 {
        let mut rng = stream(21, r as u64);
        let psi = random_system(&layout, r, &mut rng);
        let allowed = random_allowed_sets(16, 8, 11, &mut rng);
        let res = rank_probability_experiment(&layout, &psi, &allowed, 20_000, r as u64)?;
        println!(
            "rank {r}: {:.4} ± {:.4} vs (3/4)^r = {:.4} {}",
            res.tally.freq(),
            res.tally.se(),
            res.bound,
            if res.pass { "ok" } else { "over" }
        );
    }
    Ok(())
}
