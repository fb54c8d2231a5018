//! Affine restriction and clique extracted at the leaf a successful walk
//! reaches.

use bclique::f2::LinearSystem;
use bclique::pdt::{extract_restriction, simulate_walk, NonEdgeInstance, ParityDecisionTree};
use bclique::rng::stream;
use bclique::BlockGraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = BlockGraph::sample(16, 0.95, 6, 8)?;
    let inst = NonEdgeInstance::new(&g, vec![])?;
    let tree = ParityDecisionTree::random(inst.layout(), 3, &inst.free_blocks(), 6, &mut stream(8, 0));
    for t in 0..50 {
        let w = simulate_walk(&inst, &tree, &mut stream(8, t))?;
        if !w.is_success() {
            continue;
        }
        let psi = LinearSystem::from_equations(inst.layout().dims(), tree.path_constraints(w.node).unwrap());
        let e = extract_restriction(&inst, &w, &psi, 8 * tree.depth())?;
        println!("walk {t} reached leaf {} with rank {}", w.node, e.rank);
        println!("closure blocks {:?}, fixed blocks {}", e.closure.iter().collect::<Vec<_>>(), e.fixed());
        println!("M' = {:?}", e.m_prime);
        println!("few blocks {}, implies {}, clique {}", e.few_blocks, e.implies, e.clique);
        return Ok(());
    }
    println!("no successful walk");
    Ok(())
}
