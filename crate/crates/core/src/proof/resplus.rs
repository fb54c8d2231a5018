use super::{check_budget, points, step, ProofError};
use crate::cnf::{CnfFormula, Lit};
use crate::f2::{Equation, LinearForm, LinearSystem};

/// Disjunction of linear equations; the empty clause is false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearClause {
    pub dims: usize,
    pub eqs: Vec<Equation>,
}

impl LinearClause {
    pub fn empty(dims: usize) -> Self {
        Self { dims, eqs: Vec::new() }
    }

    pub fn new(dims: usize, eqs: Vec<Equation>) -> Self {
        Self { dims, eqs }
    }

    /// `∨ (x_v = 1)` over positive literals and `(x_v = 0)` over negative ones.
    pub fn from_cnf(dims: usize, clause: &[Lit]) -> Self {
        let eqs = clause
            .iter()
            .map(|&l| Equation::new(LinearForm::var(dims, l.unsigned_abs() as usize - 1), l > 0))
            .collect();
        Self { dims, eqs }
    }

    pub fn is_empty(&self) -> bool {
        self.eqs.is_empty()
    }

    pub fn contains(&self, eq: &Equation) -> bool {
        self.eqs.contains(eq)
    }

    /// Equality as sets of equations.
    pub fn same_as(&self, other: &LinearClause) -> bool {
        self.eqs.iter().all(|e| other.contains(e)) && other.eqs.iter().all(|e| self.contains(e))
    }

    /// The system `f_i = a_i + 1` of points falsifying the clause.
    pub fn negation(&self) -> LinearSystem {
        LinearSystem::from_equations(self.dims, self.eqs.iter().map(|e| Equation::new(e.form.clone(), !e.rhs)))
    }

    pub(crate) fn evaluator(&self) -> impl Fn(u64) -> bool + Sync {
        let eqs: Vec<(u64, bool)> = self
            .eqs
            .iter()
            .map(|e| (e.form.0.words().first().copied().unwrap_or(0), e.rhs))
            .collect();
        move |p: u64| eqs.iter().any(|&(m, r)| ((m & p).count_ones() & 1 == 1) == r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RlinJust {
    Axiom(usize),
    /// From `C ∨ (pivot = 1)` on line `j` and `D ∨ (pivot = 0)` on line `k`.
    Res { j: usize, k: usize, pivot: LinearForm },
    Weaken(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RlinLine {
    pub clause: LinearClause,
    pub just: RlinJust,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResPlusProof {
    pub num_vars: usize,
    pub lines: Vec<RlinLine>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResPlusReport {
    pub length: usize,
    /// Most resolution steps on any path from an axiom to the final line.
    pub depth: usize,
}

impl ResPlusProof {
    /// Resolution depth of each line.
    pub fn line_depths(&self) -> Vec<usize> {
        let mut d: Vec<usize> = Vec::with_capacity(self.lines.len());
        for line in &self.lines {
            let v = match &line.just {
                RlinJust::Axiom(_) => 0,
                RlinJust::Res { j, k, .. } => 1 + d[*j].max(d[*k]),
                RlinJust::Weaken(j) => d[*j],
            };
            d.push(v);
        }
        d
    }
}

pub fn verify_resplus(f: &CnfFormula, proof: &ResPlusProof, budget: usize) -> Result<ResPlusReport, ProofError> {
    let n = proof.num_vars;
    if n != f.num_vars {
        return Err(step(0, format!("proof has {n} variables, formula {}", f.num_vars)));
    }
    check_budget(n, budget)?;
    if proof.lines.is_empty() {
        return Err(ProofError::Empty);
    }
    let mut sat: Vec<crate::bits::BitSet> = Vec::with_capacity(proof.lines.len());
    for (i, line) in proof.lines.iter().enumerate() {
        let c = &line.clause;
        if c.dims != n || c.eqs.iter().any(|e| e.form.dims() != n) {
            return Err(step(i, "clause over the wrong number of variables"));
        }
        let here = points(n, c.evaluator());
        match &line.just {
            RlinJust::Axiom(a) => {
                let ok = f.clauses.get(*a).is_some_and(|cl| LinearClause::from_cnf(n, cl).same_as(c));
                if !ok {
                    return Err(step(i, format!("not axiom {a}")));
                }
            }
            RlinJust::Res { j, k, pivot } => {
                if *j >= i || *k >= i {
                    return Err(step(i, "premise does not precede the line"));
                }
                if pivot.is_zero() || pivot.dims() != n {
                    return Err(step(i, "bad pivot"));
                }
                let one = Equation::new(pivot.clone(), true);
                let zero = Equation::new(pivot.clone(), false);
                if !proof.lines[*j].clause.contains(&one) {
                    return Err(step(i, format!("line {j} lacks (pivot = 1)")));
                }
                if !proof.lines[*k].clause.contains(&zero) {
                    return Err(step(i, format!("line {k} lacks (pivot = 0)")));
                }
                let mut res: Vec<Equation> = proof.lines[*j].clause.eqs.iter().filter(|e| **e != one).cloned().collect();
                for e in proof.lines[*k].clause.eqs.iter().filter(|e| **e != zero) {
                    if !res.contains(e) {
                        res.push(e.clone());
                    }
                }
                if !LinearClause::new(n, res).same_as(c) {
                    return Err(step(i, "not the resolvent"));
                }
            }
            RlinJust::Weaken(j) => {
                if *j >= i {
                    return Err(step(i, "premise does not precede the line"));
                }
                if !sat[*j].is_subset(&here) {
                    return Err(step(i, format!("not implied by line {j}")));
                }
            }
        }
        sat.push(here);
    }
    let last = proof.lines.len() - 1;
    if !proof.lines[last].clause.is_empty() {
        return Err(step(last, "final line is not the empty clause"));
    }
    Ok(ResPlusReport {
        length: proof.lines.len(),
        depth: proof.line_depths()[last],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_and_not_x() -> (CnfFormula, ResPlusProof) {
        let f = CnfFormula::plain(1, vec![vec![1], vec![-1]]);
        let x = LinearForm::var(1, 0);
        let proof = ResPlusProof {
            num_vars: 1,
            lines: vec![
                RlinLine {
                    clause: LinearClause::from_cnf(1, &[1]),
                    just: RlinJust::Axiom(0),
                },
                RlinLine {
                    clause: LinearClause::from_cnf(1, &[-1]),
                    just: RlinJust::Axiom(1),
                },
                RlinLine {
                    clause: LinearClause::empty(1),
                    just: RlinJust::Res { j: 0, k: 1, pivot: x },
                },
            ],
        };
        (f, proof)
    }

    #[test]
    fn plain_resolution_refutation() {
        let (f, p) = x_and_not_x();
        assert_eq!(verify_resplus(&f, &p, 24), Ok(ResPlusReport { length: 3, depth: 1 }));
    }

    #[test]
    fn pivot_absent_from_premise_rejected() {
        let f = CnfFormula::plain(2, vec![vec![1], vec![-1]]);
        let (_, mut p) = x_and_not_x();
        p.num_vars = 2;
        p.lines[0].clause = LinearClause::from_cnf(2, &[1]);
        p.lines[1].clause = LinearClause::from_cnf(2, &[-1]);
        p.lines[2] = RlinLine {
            clause: LinearClause::empty(2),
            just: RlinJust::Res {
                j: 0,
                k: 1,
                pivot: LinearForm::var(2, 1),
            },
        };
        assert!(matches!(verify_resplus(&f, &p, 24), Err(ProofError::Step { line: 2, .. })));
    }

    #[test]
    fn weakening_keeps_depth() {
        let (f, mut p) = x_and_not_x();
        // x = 1 weakened to itself or (x = 1): a chain of weakenings adds no depth.
        let w = RlinLine {
            clause: p.lines[0].clause.clone(),
            just: RlinJust::Weaken(0),
        };
        p.lines.insert(1, w.clone());
        p.lines.insert(2, RlinLine {
            just: RlinJust::Weaken(1),
            ..w
        });
        p.lines[4].just = RlinJust::Res {
            j: 2,
            k: 3,
            pivot: LinearForm::var(1, 0),
        };
        assert_eq!(verify_resplus(&f, &p, 24), Ok(ResPlusReport { length: 5, depth: 1 }));
    }

    #[test]
    fn unsound_weakening_rejected() {
        let f = CnfFormula::plain(2, vec![vec![1, 2]]);
        let p = ResPlusProof {
            num_vars: 2,
            lines: vec![
                RlinLine {
                    clause: LinearClause::from_cnf(2, &[1, 2]),
                    just: RlinJust::Axiom(0),
                },
                RlinLine {
                    clause: LinearClause::new(2, vec![Equation::new(LinearForm::from_vars(2, [0, 1]), true)]),
                    just: RlinJust::Weaken(0),
                },
            ],
        };
        assert!(matches!(verify_resplus(&f, &p, 24), Err(ProofError::Step { line: 1, .. })));
    }
}
