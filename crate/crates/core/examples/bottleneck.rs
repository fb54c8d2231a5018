//! Block width, the node map and the tree of potential coverings on the
//! triangle-DAG of a refutation.

use bclique::bottleneck::{
    analyze_dag, covering_tree, random_cover_input, refutation_dag, sparse_matching_complement, RectIndex, DEFAULT_NODE_CAP,
};
use bclique::density::min_almost_complete;
use bclique::rng::stream;
use bclique::BlockGraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dag = (0..100).find_map(|seed| {
        let g = BlockGraph::sample(16, 0.07, 3, seed).ok()?;
        Some((g.clone(), refutation_dag(&g).ok()??))
    });
    let Some((g, dag)) = dag else {
        println!("no unsatisfiable instance found");
        return Ok(());
    };
    let idx = RectIndex::new(&g)?;
    println!("{} solution rectangles, DAG of {} nodes", idx.len(), dag.len());
    for q in [1, 2] {
        let a = analyze_dag(&dag, &idx, q, DEFAULT_NODE_CAP)?;
        println!(
            "q = {q}: assigned {} of {}, survivors within 2q {}, trees {}, coverage {}, nesting {}, unique paths {}",
            a.assigned,
            a.domain,
            a.survivor_claim,
            a.trees,
            a.checks.coverage(),
            a.checks.nesting(),
            a.checks.unique_paths()
        );
    }

    let g = sparse_matching_complement(64, 3, 1)?;
    let s = min_almost_complete(&g)?.s_star;
    let idx = RectIndex::new(&g)?;
    let (tri, xs, ys) = random_cover_input(&idx, 2, 1, &mut stream(1, 0))?;
    let t = covering_tree(&tri, &xs, &ys, &idx, 1, DEFAULT_NODE_CAP)?;
    let c = t.census(64);
    println!("n = 64, s = {s}: census {:?} against {:?}", c.counts, c.bounds);
    Ok(())
}
