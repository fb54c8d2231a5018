//! Block and binary clique encodings, DIMACS output and a brute-force check.

use bclique::cnf::{dimacs::to_dimacs, encode_bin_clique, encode_block_clique};
use bclique::BlockGraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = BlockGraph::sample(2, 0.5, 3, 5)?;
    let f = encode_block_clique(&g);
    print!("{}", to_dimacs(&f, &[]));

    let sat = f.brute_force_sat();
    let clique = g.find_transversal_clique();
    println!("satisfiable = {}, clique = {:?}", sat.is_some(), clique);
    if let Some(a) = sat {
        println!("selected columns: {:?}", a.columns(&f.var_map));
    }

    let flat = BlockGraph::sample(4, 0.7, 2, 5)?.flatten();
    let bin = encode_bin_clique(&flat, 3)?;
    println!("binary encoding of a 3-clique in 8 vertices: {} vars, {} clauses", bin.num_vars, bin.clauses.len());
    Ok(())
}
