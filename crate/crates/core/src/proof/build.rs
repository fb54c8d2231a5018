use std::collections::HashMap;

use super::cp::{cp_axioms, CpJust, CpLine, CpProof, Ineq, Q};
use super::resplus::{LinearClause, ResPlusProof, RlinJust, RlinLine};
use super::ProofError;
use crate::cnf::{encode_block_clique, CnfFormula, Lit};
use crate::f2::{Equation, LinearForm};
use crate::graph::BlockGraph;

/// Tree-like resolution refutation found by DPLL without propagation,
/// branching on variables in order. `None` when `f` is satisfiable.
pub fn tree_resolution(f: &CnfFormula) -> Option<ResPlusProof> {
    let n = f.num_vars;
    let mut lines = Vec::new();
    let mut axiom_line = HashMap::new();
    let mut assign = vec![None; n];
    fn go(
        f: &CnfFormula,
        assign: &mut Vec<Option<bool>>,
        lines: &mut Vec<RlinLine>,
        axiom_line: &mut HashMap<usize, usize>,
    ) -> Option<usize> {
        let n = f.num_vars;
        let falsified = f.clauses.iter().position(|c| {
            c.iter().all(|&l| assign[l.unsigned_abs() as usize - 1] == Some(l < 0))
        });
        if let Some(c) = falsified {
            return Some(*axiom_line.entry(c).or_insert_with(|| {
                lines.push(RlinLine {
                    clause: LinearClause::from_cnf(n, &f.clauses[c]),
                    just: RlinJust::Axiom(c),
                });
                lines.len() - 1
            }));
        }
        let v = assign.iter().position(Option::is_none)?;
        let x = LinearForm::var(n, v);
        let mut side = [0usize; 2];
        for b in [false, true] {
            assign[v] = Some(b);
            let line = go(f, assign, lines, axiom_line);
            assign[v] = None;
            let line = line?;
            // A clause not mentioning x_v is already falsified without it.
            if !lines[line].clause.contains(&Equation::new(x.clone(), !b)) {
                return Some(line);
            }
            side[b as usize] = line;
        }
        let (j, k) = (side[0], side[1]);
        let one = Equation::new(x.clone(), true);
        let zero = Equation::new(x.clone(), false);
        let mut eqs: Vec<Equation> = lines[j].clause.eqs.iter().filter(|e| **e != one).cloned().collect();
        for e in lines[k].clause.eqs.iter().filter(|e| **e != zero) {
            if !eqs.contains(e) {
                eqs.push(e.clone());
            }
        }
        lines.push(RlinLine {
            clause: LinearClause::new(n, eqs),
            just: RlinJust::Res { j, k, pivot: x },
        });
        Some(lines.len() - 1)
    }
    go(f, &mut assign, &mut lines, &mut axiom_line)?;
    Some(ResPlusProof { num_vars: n, lines })
}

/// A resolution proof over ordinary clauses, read as semantic cutting planes:
/// each clause becomes its inequality and each step keeps its premises.
pub fn resolution_to_cp(f: &CnfFormula, proof: &ResPlusProof) -> Result<CpProof, ProofError> {
    let n = proof.num_vars;
    let axioms = cp_axioms(f);
    let lines = proof
        .lines
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let mut d = vec![0i64; n];
            let mut c = 1i64;
            for e in &line.clause.eqs {
                let mut vars = e.form.vars();
                let (Some(v), None) = (vars.next(), vars.next()) else {
                    return Err(ProofError::Translation(format!("line {i} is not an ordinary clause")));
                };
                if e.rhs {
                    d[v] += 1;
                } else {
                    d[v] -= 1;
                    c -= 1;
                }
            }
            let just = match line.just {
                RlinJust::Axiom(a) => CpJust::Axiom(a),
                RlinJust::Res { j, k, .. } => CpJust::From(j, k),
                RlinJust::Weaken(j) => CpJust::From(j, j),
            };
            let ineq = match just {
                CpJust::Axiom(a) => axioms[a].clone(),
                CpJust::From(..) => Ineq::from_ints(&d, c),
            };
            Ok(CpLine { ineq, just })
        })
        .collect::<Result<_, _>>()?;
    Ok(CpProof { num_vars: n, lines })
}

fn clause_index(f: &CnfFormula, lits: &[Lit]) -> usize {
    let mut want = lits.to_vec();
    want.sort_unstable();
    f.clauses
        .iter()
        .position(|c| {
            let mut c = c.clone();
            c.sort_unstable();
            c == want
        })
        .expect("clause present")
}

/// The block encoding of the edgeless graph with two blocks of two vertices:
/// one variable per block, one clause per pair of values.
fn edgeless_2x2() -> CnfFormula {
    encode_block_clique(&BlockGraph::empty(2, 2).expect("valid size"))
}

/// Seven-line cutting planes refutation of the edgeless 2-by-2 block formula:
/// `x1 >= 1` from the two clauses with `x1` positive, `-x1 >= 0` from the other
/// two, then `0 >= 1`.
pub fn edgeless_cp_refutation() -> (CnfFormula, CpProof) {
    let f = edgeless_2x2();
    let ax = cp_axioms(&f);
    let axiom = |lits: &[Lit]| {
        let i = clause_index(&f, lits);
        CpLine {
            ineq: ax[i].clone(),
            just: CpJust::Axiom(i),
        }
    };
    let derived = |d: &[i64], c: i64, j, k| CpLine {
        ineq: Ineq::new(d.iter().map(|&x| Q::from_integer(x)).collect(), Q::from_integer(c)),
        just: CpJust::From(j, k),
    };
    let lines = vec![
        axiom(&[1, 2]),
        axiom(&[1, -2]),
        derived(&[1, 0], 1, 0, 1),
        axiom(&[-1, 2]),
        axiom(&[-1, -2]),
        derived(&[-1, 0], 0, 3, 4),
        derived(&[0, 0], 1, 2, 5),
    ];
    (f, CpProof { num_vars: 2, lines })
}

/// Eleven-line resolution-over-parities refutation of the edgeless 2-by-2
/// block formula of depth 2: each clause is weakened to a statement about
/// `x1 + x2` or `x1`, two resolutions on `x1` give `x1 + x2 = 1` and
/// `x1 + x2 = 0`, and a final resolution on the parity closes it.
pub fn edgeless_resplus_refutation() -> (CnfFormula, ResPlusProof) {
    let f = edgeless_2x2();
    let n = 2;
    let x1 = LinearForm::var(n, 0);
    let par = LinearForm::from_vars(n, [0, 1]);
    let eq = |f: &LinearForm, b| Equation::new(f.clone(), b);
    let axiom = |lits: &[Lit]| RlinLine {
        clause: LinearClause::from_cnf(n, lits),
        just: RlinJust::Axiom(clause_index(&f, lits)),
    };
    let line = |eqs: Vec<Equation>, just| RlinLine {
        clause: LinearClause::new(n, eqs),
        just,
    };
    let res = |j, k, p: &LinearForm| RlinJust::Res { j, k, pivot: p.clone() };
    let lines = vec![
        axiom(&[1, 2]),
        line(vec![eq(&par, true), eq(&x1, true)], RlinJust::Weaken(0)),
        axiom(&[-1, -2]),
        line(vec![eq(&par, true), eq(&x1, false)], RlinJust::Weaken(2)),
        line(vec![eq(&par, true)], res(1, 3, &x1)),
        axiom(&[1, -2]),
        line(vec![eq(&par, false), eq(&x1, true)], RlinJust::Weaken(5)),
        axiom(&[-1, 2]),
        line(vec![eq(&par, false), eq(&x1, false)], RlinJust::Weaken(7)),
        line(vec![eq(&par, false)], res(6, 8, &x1)),
        line(vec![], res(4, 9, &par)),
    ];
    (f, ResPlusProof { num_vars: n, lines })
}

/// Single-line mutations: each nonzero coefficient negated, the constant raised
/// by one, and each premise or axiom index moved to a different line.
pub fn cp_mutations(p: &CpProof) -> Vec<CpProof> {
    let mut out = Vec::new();
    let mut push = |q: CpProof| {
        if q != *p {
            out.push(q);
        }
    };
    for (i, line) in p.lines.iter().enumerate() {
        for t in 0..line.ineq.coeffs.len() {
            if line.ineq.coeffs[t] != Q::from_integer(0) {
                let mut q = p.clone();
                q.lines[i].ineq.coeffs[t] = -q.lines[i].ineq.coeffs[t];
                push(q);
            }
        }
        let mut q = p.clone();
        q.lines[i].ineq.constant += Q::from_integer(1);
        push(q);
        match line.just {
            CpJust::Axiom(a) => {
                let mut q = p.clone();
                q.lines[i].just = CpJust::Axiom(a + 1);
                push(q);
            }
            CpJust::From(j, k) if i > 1 => {
                let mut q = p.clone();
                q.lines[i].just = CpJust::From((j + 1) % i, k);
                push(q);
                let mut q = p.clone();
                q.lines[i].just = CpJust::From(j, (k + 1) % i);
                push(q);
            }
            CpJust::From(..) => {}
        }
    }
    out
}

/// Single-line mutations: each right-hand side flipped, each equation dropped,
/// each pivot changed or its premises swapped, and each premise or axiom index
/// moved.
pub fn resplus_mutations(p: &ResPlusProof) -> Vec<ResPlusProof> {
    let n = p.num_vars;
    let mut out = Vec::new();
    let mut push = |q: ResPlusProof| {
        if q != *p {
            out.push(q);
        }
    };
    for (i, line) in p.lines.iter().enumerate() {
        for t in 0..line.clause.eqs.len() {
            let mut q = p.clone();
            q.lines[i].clause.eqs[t].rhs ^= true;
            push(q);
            let mut q = p.clone();
            q.lines[i].clause.eqs.remove(t);
            push(q);
        }
        match &line.just {
            RlinJust::Axiom(a) => {
                let mut q = p.clone();
                q.lines[i].just = RlinJust::Axiom(a + 1);
                push(q);
            }
            RlinJust::Res { j, k, pivot } => {
                let mut other = pivot.clone();
                other.0.toggle(if pivot.0.contains(0) && pivot.vars().count() == 1 { 1 % n } else { 0 });
                let mut q = p.clone();
                q.lines[i].just = RlinJust::Res {
                    j: *j,
                    k: *k,
                    pivot: other,
                };
                push(q);
                let mut q = p.clone();
                q.lines[i].just = RlinJust::Res {
                    j: *k,
                    k: *j,
                    pivot: pivot.clone(),
                };
                push(q);
            }
            RlinJust::Weaken(j) if *j > 0 => {
                let mut q = p.clone();
                q.lines[i].just = RlinJust::Weaken(j - 1);
                push(q);
            }
            RlinJust::Weaken(_) => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::search_falsified;
    use crate::proof::dag::{cp_to_triangle_dag, resplus_to_affine_dag, validate_triangle_dag, VarSplit};
    use crate::proof::{verify_cp, verify_resplus, DEFAULT_VAR_BUDGET};
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn hand_built_cp_refutation_verifies_and_translates() {
        let (f, p) = edgeless_cp_refutation();
        assert_eq!(verify_cp(&cp_axioms(&f), &p, DEFAULT_VAR_BUDGET), Ok(7));
        let split = VarSplit::prefix(2, 1);
        let dag = cp_to_triangle_dag(&f, &p, &split).unwrap();
        assert_eq!(validate_triangle_dag(&f, &dag, &split), Ok(()));
        assert_eq!(dag.nodes[dag.root].tri.count(), 4);
    }

    #[test]
    fn hand_built_resplus_refutation_verifies_and_translates() {
        let (f, p) = edgeless_resplus_refutation();
        let r = verify_resplus(&f, &p, DEFAULT_VAR_BUDGET).unwrap();
        assert_eq!((r.length, r.depth), (11, 2));
        let dag = resplus_to_affine_dag(&p).unwrap();
        assert_eq!(dag.validate(&f), Ok(()));
        assert_eq!((dag.len(), dag.depth().unwrap()), (11, 2));
    }

    #[test]
    fn every_mutation_is_rejected() {
        let (f, p) = edgeless_cp_refutation();
        let ax = cp_axioms(&f);
        let split = VarSplit::prefix(2, 1);
        for q in cp_mutations(&p) {
            let ok = verify_cp(&ax, &q, 24).is_ok()
                && cp_to_triangle_dag(&f, &q, &split).is_ok_and(|d| validate_triangle_dag(&f, &d, &split).is_ok());
            assert!(!ok, "accepted mutation {q:?}");
        }
        let (f, p) = edgeless_resplus_refutation();
        for q in resplus_mutations(&p) {
            let ok = verify_resplus(&f, &q, 24).is_ok() && resplus_to_affine_dag(&q).is_ok_and(|d| d.validate(&f).is_ok());
            assert!(!ok, "accepted mutation {q:?}");
        }
    }

    #[test]
    fn dpll_refutations_verify_on_unsat_block_formulas() {
        let mut rng = stream(81, 0);
        let mut refuted = 0;
        for s in 0..40 {
            let k = rng.gen_range(2..=3);
            let n = if k == 2 { 4 } else { 2 };
            let g = BlockGraph::sample(n, 0.4, k, s).unwrap();
            let f = encode_block_clique(&g);
            match tree_resolution(&f) {
                None => assert!(f.brute_force_sat().is_some()),
                Some(p) => {
                    assert!(f.brute_force_sat().is_none());
                    let r = verify_resplus(&f, &p, 24).unwrap();
                    let dag = resplus_to_affine_dag(&p).unwrap();
                    dag.validate(&f).unwrap();
                    assert_eq!(dag.depth().unwrap(), r.depth);
                    let cp = resolution_to_cp(&f, &p).unwrap();
                    assert_eq!(verify_cp(&cp_axioms(&f), &cp, 24), Ok(p.lines.len()));
                    let split = VarSplit::clique_halves(&f.var_map);
                    let split = if split.x.is_empty() { VarSplit::prefix(f.num_vars, 1) } else { split };
                    let tdag = cp_to_triangle_dag(&f, &cp, &split).unwrap();
                    validate_triangle_dag(&f, &tdag, &split).unwrap();
                    refuted += 1;
                }
            }
        }
        assert!(refuted > 5);
    }

    #[test]
    fn leaf_triangles_only_hold_falsifying_inputs() {
        let (f, p) = edgeless_cp_refutation();
        let split = VarSplit::prefix(2, 1);
        let dag = cp_to_triangle_dag(&f, &p, &split).unwrap();
        for node in dag.nodes.iter().filter(|n| n.children.is_empty()) {
            let o = node.output.unwrap();
            for x in 0..2 {
                for y in 0..2 {
                    let a = crate::cnf::Assignment(vec![x == 1, y == 1]);
                    let falsified = search_falsified(&CnfFormula::plain(2, vec![f.clauses[o].clone()]), &a).unwrap().is_some();
                    assert_eq!(node.tri.contains(x, y), falsified);
                }
            }
        }
    }
}
