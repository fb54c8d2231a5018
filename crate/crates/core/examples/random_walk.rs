//! The random walk through a parity decision tree: one transcript, the walk's
//! leaf distribution against direct runs, and the success rate.

use bclique::f2::Layout;
use bclique::pdt::{simulate_walk, success_rate, walk_distribution_test, NonEdgeInstance, ParityDecisionTree};
use bclique::rng::stream;
use bclique::BlockGraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = BlockGraph::sample(16, 0.5, 6, 3)?;
    let inst = NonEdgeInstance::new(&g, vec![])?;
    let tree = ParityDecisionTree::random(inst.layout(), 4, &inst.free_blocks(), 4, &mut stream(3, 0));
    println!("tree: {}", tree.to_text());

    let w = simulate_walk(&inst, &tree, &mut stream(3, 1))?;
    println!("walk: {:?} after {} iterations, path {:?}", w.outcome, w.iterations(), w.path);

    let d = walk_distribution_test(&inst, &tree, 20_000, 4)?;
    println!("leaf TV distance = {:.4}", d.leaf_tv);

    let dense = BlockGraph::complete(16, 6)?;
    let inst = NonEdgeInstance::new(&dense, vec![])?;
    let tree = ParityDecisionTree::random(Layout::new(6, 4), 2, &inst.free_blocks(), 3, &mut stream(5, 0));
    let s = success_rate(&inst, &tree, 1.0, 0.0, 16, 2000, 6)?;
    println!("complete graph: success {:.3} (bound {:.3})", s.success.freq(), s.bound);
    Ok(())
}
