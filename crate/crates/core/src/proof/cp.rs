use num_integer::Integer;
use num_rational::Rational64;

use super::{check_budget, points, step, ProofError};
use crate::bits::BitSet;
use crate::cnf::CnfFormula;

pub type Q = Rational64;

/// `coeffs · x >= constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ineq {
    pub coeffs: Vec<Q>,
    pub constant: Q,
}

impl Ineq {
    pub fn new(coeffs: Vec<Q>, constant: Q) -> Self {
        Self { coeffs, constant }
    }

    pub fn from_ints(coeffs: &[i64], constant: i64) -> Self {
        Self::new(coeffs.iter().map(|&c| Q::from_integer(c)).collect(), Q::from_integer(constant))
    }

    pub fn num_vars(&self) -> usize {
        self.coeffs.len()
    }

    /// `0 >= 1`.
    pub fn is_contradiction(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Q::from_integer(0)) && self.constant == Q::from_integer(1)
    }

    /// The same inequality scaled to integer coefficients.
    pub fn integer_form(&self) -> (Vec<i64>, i64) {
        let l = self
            .coeffs
            .iter()
            .chain(std::iter::once(&self.constant))
            .fold(1i64, |acc, q| acc.lcm(q.denom()));
        let scale = |q: &Q| (q * Q::from_integer(l)).to_integer();
        (self.coeffs.iter().map(scale).collect(), scale(&self.constant))
    }

    /// Predicate on points encoded as words, bit `v` for variable `v`.
    pub(crate) fn evaluator(&self) -> impl Fn(u64) -> bool + Sync {
        let (d, c) = self.integer_form();
        let n = d.len();
        let lo_bits = n.min(12);
        let table = |shift: usize, width: usize| -> Vec<i64> {
            (0..1usize << width)
                .map(|w| (0..width).filter(|t| (w >> t) & 1 == 1).map(|t| d[shift + t]).sum())
                .collect()
        };
        let lo = table(0, lo_bits);
        let hi = table(lo_bits, n - lo_bits);
        let mask = (1u64 << lo_bits) - 1;
        move |p: u64| lo[(p & mask) as usize] + hi[(p >> lo_bits) as usize] >= c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpJust {
    Axiom(usize),
    From(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpLine {
    pub ineq: Ineq,
    pub just: CpJust,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpProof {
    pub num_vars: usize,
    pub lines: Vec<CpLine>,
}

/// Inequalities of a CNF: the clause translations in clause order, then for
/// each variable `v` the bounds `x_v >= 0` and `-x_v >= -1`.
pub fn cp_axioms(f: &CnfFormula) -> Vec<Ineq> {
    let n = f.num_vars;
    let mut out = Vec::with_capacity(f.clauses.len() + 2 * n);
    for c in &f.clauses {
        let mut d = vec![0i64; n];
        let mut k = 1i64;
        for &l in c {
            let v = l.unsigned_abs() as usize - 1;
            if l > 0 {
                d[v] += 1;
            } else {
                d[v] -= 1;
                k -= 1;
            }
        }
        out.push(Ineq::from_ints(&d, k));
    }
    for v in 0..n {
        let mut d = vec![0i64; n];
        d[v] = 1;
        out.push(Ineq::from_ints(&d, 0));
        d[v] = -1;
        out.push(Ineq::from_ints(&d, -1));
    }
    out
}

/// Checks every line by exhaustive enumeration of `{0,1}^n`; returns the length.
pub fn verify_cp(axioms: &[Ineq], proof: &CpProof, budget: usize) -> Result<usize, ProofError> {
    let n = proof.num_vars;
    check_budget(n, budget)?;
    if proof.lines.is_empty() {
        return Err(ProofError::Empty);
    }
    let mut sat: Vec<BitSet> = Vec::with_capacity(proof.lines.len());
    for (i, line) in proof.lines.iter().enumerate() {
        if line.ineq.num_vars() != n {
            return Err(step(i, format!("expected {n} coefficients, got {}", line.ineq.num_vars())));
        }
        let here = points(n, line.ineq.evaluator());
        match line.just {
            CpJust::Axiom(a) => {
                if axioms.get(a) != Some(&line.ineq) {
                    return Err(step(i, format!("not axiom {a}")));
                }
            }
            CpJust::From(j, k) => {
                if j >= i || k >= i {
                    return Err(step(i, "premise does not precede the line"));
                }
                let mut both = sat[j].clone();
                both.intersect_with(&sat[k]);
                if !both.is_subset(&here) {
                    return Err(step(i, format!("not implied by lines {j} and {k}")));
                }
            }
        }
        sat.push(here);
    }
    let last = proof.lines.len() - 1;
    if !proof.lines[last].ineq.is_contradiction() {
        return Err(step(last, "final line is not 0 >= 1"));
    }
    Ok(proof.lines.len())
}
