//! Protocol trees over the input split: error of the baseline protocol,
//! subcube-likeness of its leaves and the non-edge probability per leaf.

use bclique::bottleneck::Domain;
use bclique::comm::{distributional_error, leaf_census, ErrorMode, ProtocolTree, DEFAULT_PAIR_BUDGET};
use bclique::density::min_almost_complete;
use bclique::BlockGraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = BlockGraph::sample(16, 0.9, 3, 2)?;
    let s = min_almost_complete(&g)?.s_star;
    let dom = Domain::new(16, 3)?;

    let base = ProtocolTree::baseline(dom, 0, 1)?;
    let exact = distributional_error(&base, &g, ErrorMode::Exhaustive { budget: DEFAULT_PAIR_BUDGET })?;
    let sampled = distributional_error(&base, &g, ErrorMode::Sampled { trials: 100_000, seed: 1 })?;
    println!("baseline: cost {}, error {:.4}, sampled {:.4} ± {:.4}", base.cost(), exact.error, sampled.error, sampled.se);

    for (name, t) in [("baseline", base), ("random", ProtocolTree::random_coordinate(dom, 6, 4)?)] {
        let c = leaf_census(&t, &g, s, 0.9, 16)?;
        let (safe, dangerous) = (c.safe_check(), c.dangerous_check());
        println!(
            "{name}: s = {s}, bound {:.3}; safe leaves {} (max p {:.3}), dangerous leaves {} (max p {:.3})",
            c.bound, safe.checked, safe.max_p, dangerous.checked, dangerous.max_p
        );
    }
    Ok(())
}
