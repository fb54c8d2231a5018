//! Check cutting-planes and Res(⊕) refutations, reject their mutations and
//! translate them into shape-DAGs.

use bclique::cnf::encode_block_clique;
use bclique::proof::{
    cp_axioms, cp_mutations, cp_to_triangle_dag, edgeless_cp_refutation, edgeless_resplus_refutation, resolution_to_cp,
    resplus_mutations, resplus_to_affine_dag, tree_resolution, validate_triangle_dag, verify_cp, verify_resplus, VarSplit,
    DEFAULT_VAR_BUDGET,
};
use bclique::BlockGraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (f, cp) = edgeless_cp_refutation();
    print!("{}", cp.to_text());
    println!("cp: {} lines verified", verify_cp(&cp_axioms(&f), &cp, DEFAULT_VAR_BUDGET)?);
    let rejected = cp_mutations(&cp)
        .iter()
        .filter(|m| verify_cp(&cp_axioms(&f), m, DEFAULT_VAR_BUDGET).is_err())
        .count();
    println!("cp mutations rejected: {rejected} of {}", cp_mutations(&cp).len());

    let (f, rl) = edgeless_resplus_refutation();
    let rep = verify_resplus(&f, &rl, DEFAULT_VAR_BUDGET)?;
    println!("res(+): {} lines, depth {}", rep.length, rep.depth);
    let muts = resplus_mutations(&rl);
    let rejected = muts.iter().filter(|m| verify_resplus(&f, m, DEFAULT_VAR_BUDGET).is_err()).count();
    println!("res(+) mutations rejected: {rejected} of {}", muts.len());

    // a generated refutation of a sparse instance
    let g = BlockGraph::sample(2, 0.3, 3, 4)?;
    let f = encode_block_clique(&g);
    let Some(res) = tree_resolution(&f) else {
        println!("instance is satisfiable");
        return Ok(());
    };
    let affine = resplus_to_affine_dag(&res)?;
    affine.validate(&f)?;
    let cp = resolution_to_cp(&f, &res)?;
    let split = VarSplit::clique_halves(&f.var_map);
    let dag = cp_to_triangle_dag(&f, &cp, &split)?;
    validate_triangle_dag(&f, &dag, &split)?;
    println!("generated: {} lines, affine DAG {} nodes, triangle DAG {} nodes", res.lines.len(), affine.len(), dag.len());
    Ok(())
}
