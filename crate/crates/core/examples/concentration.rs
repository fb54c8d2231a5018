//! How often a uniform tuple has many non-neighbors, against the tail bound.

use bclique::density::concentration_experiment_ac;
use bclique::stats::write_csv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let res = concentration_experiment_ac(1024, 0.9, 4, 5, 2000, 11)?;
    println!(
        "threshold = {:.2}, frequency = {:.4} ± {:.4}, reference = {:.4}",
        res.threshold,
        res.tally.freq(),
        res.tally.se(),
        res.reference
    );
    write_csv(std::io::stdout(), &["concentration".into()], &[res.row()])?;
    Ok(())
}
