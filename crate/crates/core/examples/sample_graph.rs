//! Sample G(n, p, k), save it, load it back and look at common neighborhoods.

use bclique::{BlockGraph, VertexId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = BlockGraph::sample(16, 0.5, 3, 7)?;
    println!("n = {}, k = {}, edges = {} of {}", g.n(), g.k(), g.edge_count(), g.cross_pair_count());

    let back = BlockGraph::from_json(&g.to_json())?;
    assert!(back == g);

    let s = [VertexId::new(0, 3), VertexId::new(1, 9)];
    let common = g.common_neighborhood(&s, 2)?;
    println!("N({s:?}) in block 2: {:?}", common.iter().collect::<Vec<_>>());

    match g.find_transversal_clique() {
        Some(c) => println!("transversal clique: {c:?}"),
        None => println!("no transversal clique"),
    }
    Ok(())
}
