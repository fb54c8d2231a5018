//! Almost-completeness and bounded common neighborhoods of sampled graphs.

use bclique::density::{check_bounded_cn, min_almost_complete, CnMode, CnParams, DEFAULT_BUDGET};
use bclique::stats::almost_complete_threshold;
use bclique::BlockGraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for p in [0.5, 0.9, 0.99] {
        let g = BlockGraph::sample(64, p, 4, 1)?;
        let rep = min_almost_complete(&g)?;
        println!(
            "p = {p}: s* = {}, a.a.s. threshold = {:.1}",
            rep.s_star,
            almost_complete_threshold(64, p, 4)
        );
    }

    let g = BlockGraph::sample(256, 0.875, 4, 2)?;
    let params = CnParams { alpha: 0.875, beta: 0.59, r: 3 };
    let rep = check_bounded_cn(&g, params, CnMode::Sampled { trials: 2000, seed: 3 }, DEFAULT_BUDGET)?;
    println!("bounded common neighborhoods (R = 3): pass = {}, max deviation = {:.3}", rep.pass, rep.max_deviation);
    Ok(())
}
