use serde::Serialize;

use super::cp::{CpJust, CpProof};
use super::resplus::{ResPlusProof, RlinJust};
use super::ProofError;
use crate::bottleneck::triangle::{topological, DagError, Triangle, TriangleDag, TriangleNode};
use crate::cnf::{CnfFormula, VarMap};
use crate::f2::{Equation, LinearForm, LinearSystem};

/// A partition of the (0-based) variables into an `X` and a `Y` part. Bit `t`
/// of an `x` index is variable `x[t]`, likewise for `y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VarSplit {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl VarSplit {
    /// The first half of each column's bits in `X`, the rest in `Y`.
    pub fn clique_halves(map: &VarMap) -> Self {
        let h = map.bits / 2;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..map.columns {
            for a in 0..map.bits {
                let v = map.var(i, a) as usize - 1;
                if a < h {
                    x.push(v);
                } else {
                    y.push(v);
                }
            }
        }
        Self { x, y }
    }

    /// `x` variables first, in order.
    pub fn prefix(n: usize, nx: usize) -> Self {
        Self {
            x: (0..nx).collect(),
            y: (nx..n).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.x.len() + self.y.len()
    }

    fn check(&self, n: usize) -> Result<(), ProofError> {
        let mut seen = vec![false; n];
        for &v in self.x.iter().chain(&self.y) {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(ProofError::Translation(format!("variable {v} repeated or out of range in the split")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(ProofError::Translation("split does not cover every variable".into()));
        }
        Ok(())
    }

    /// The full point for `(x, y)`, bit `v` for variable `v`.
    pub fn point(&self, x: usize, y: usize) -> u64 {
        let mut p = 0u64;
        for (t, &v) in self.x.iter().enumerate() {
            p |= (((x >> t) & 1) as u64) << v;
        }
        for (t, &v) in self.y.iter().enumerate() {
            p |= (((y >> t) & 1) as u64) << v;
        }
        p
    }
}

fn clause_falsified(clause: &[crate::cnf::Lit], p: u64) -> bool {
    clause.iter().all(|&l| {
        let v = ((p >> (l.unsigned_abs() - 1)) & 1) == 1;
        v != (l > 0)
    })
}

/// One node per proof line, labeled by the triangle of inputs falsifying the
/// line. Coefficients are scaled to integers, so `d·z < c` becomes
/// `2 d_X·x <= 2c - 1 - 2 d_Y·y`.
pub fn cp_to_triangle_dag(f: &CnfFormula, proof: &CpProof, split: &VarSplit) -> Result<TriangleDag, ProofError> {
    split.check(proof.num_vars)?;
    if proof.lines.is_empty() {
        return Err(ProofError::Empty);
    }
    let m = f.clauses.len();
    let (nx, ny) = (1usize << split.x.len(), 1usize << split.y.len());
    let score = |vars: &[usize], d: &[i64], z: usize| -> i64 {
        vars.iter().enumerate().filter(|(t, _)| (z >> t) & 1 == 1).map(|(_, &v)| d[v]).sum()
    };
    let nodes = proof
        .lines
        .iter()
        .map(|line| {
            let (d, c) = line.ineq.integer_form();
            let a = (0..nx).map(|x| 2 * score(&split.x, &d, x)).collect();
            let b = (0..ny).map(|y| 2 * c - 1 - 2 * score(&split.y, &d, y)).collect();
            let (children, output) = match line.just {
                CpJust::Axiom(i) => (vec![], (i < m).then_some(i)),
                CpJust::From(j, k) if j == k => (vec![j], None),
                CpJust::From(j, k) => (vec![j, k], None),
            };
            TriangleNode {
                tri: Triangle::new(a, b),
                children,
                output,
            }
        })
        .collect();
    Ok(TriangleDag {
        nodes,
        root: proof.lines.len() - 1,
    })
}

/// Shape-DAG validity for `Search_F^{X,Y}`, by enumeration.
pub fn validate_triangle_dag(f: &CnfFormula, dag: &TriangleDag, split: &VarSplit) -> Result<(), DagError> {
    dag.validate(|o, x, y| f.clauses.get(o).is_some_and(|c| clause_falsified(c, split.point(x, y))))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AffineEdge {
    Leaf { output: Option<usize> },
    /// `children[b]` is taken when `query = b`.
    Branch { query: LinearForm, children: [usize; 2] },
    /// A weakening step.
    Unary { child: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffineNode {
    pub system: LinearSystem,
    pub edge: AffineEdge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffineDag {
    pub num_vars: usize,
    pub nodes: Vec<AffineNode>,
    pub root: usize,
}

impl AffineDag {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn children(&self) -> Vec<Vec<usize>> {
        self.nodes
            .iter()
            .map(|n| match &n.edge {
                AffineEdge::Leaf { .. } => vec![],
                AffineEdge::Branch { children, .. } => children.to_vec(),
                AffineEdge::Unary { child } => vec![*child],
            })
            .collect()
    }

    /// Most branching edges on a root-to-leaf path; unary edges are free.
    pub fn depth(&self) -> Result<usize, DagError> {
        let order = topological(&self.children(), self.root)?;
        let mut d = vec![0usize; self.nodes.len()];
        for &v in order.iter().rev() {
            d[v] = match &self.nodes[v].edge {
                AffineEdge::Leaf { .. } => 0,
                AffineEdge::Branch { children, .. } => 1 + d[children[0]].max(d[children[1]]),
                AffineEdge::Unary { child } => d[*child],
            };
        }
        Ok(d[self.root])
    }

    /// Checks the root, edge implications and leaf conditions both by linear
    /// algebra and by enumerating `{0,1}^n`.
    pub fn validate(&self, f: &CnfFormula) -> Result<(), DagError> {
        topological(&self.children(), self.root)?;
        let n = self.num_vars;
        if n > 20 {
            return Err(DagError::Other(self.root, "domain too large to enumerate".into()));
        }
        let point = |p: u64| crate::bits::BitSet::from_words(n, &[p]);
        let sat = |s: &LinearSystem, p: u64| s.satisfied_by(&point(p));
        let implied = |from: &LinearSystem, to: &LinearSystem| !from.is_consistent() || from.implies_system(to);
        let root = &self.nodes[self.root].system;
        if root.rank() != 0 || !root.is_consistent() {
            return Err(DagError::Other(self.root, "root is not the whole space".into()));
        }
        for (v, node) in self.nodes.iter().enumerate() {
            match &node.edge {
                AffineEdge::Leaf { output } => {
                    for p in (0..1u64 << n).filter(|&p| sat(&node.system, p)) {
                        let ok = output.and_then(|o| f.clauses.get(o)).is_some_and(|c| clause_falsified(c, p));
                        if !ok {
                            return Err(if output.is_none() {
                                DagError::NoOutput(v)
                            } else {
                                DagError::Leaf { node: v, x: p as usize, y: 0 }
                            });
                        }
                    }
                }
                AffineEdge::Branch { query, children } => {
                    for b in [false, true] {
                        let mut s = node.system.clone();
                        s.push(Equation::new(query.clone(), b));
                        let child = &self.nodes[children[b as usize]].system;
                        if !implied(&s, child) {
                            return Err(DagError::Other(v, format!("branch {} does not imply its child", b as u8)));
                        }
                        if let Some(p) = (0..1u64 << n).find(|&p| sat(&s, p) && !sat(child, p)) {
                            return Err(DagError::Cover { node: v, x: p as usize, y: 0 });
                        }
                    }
                }
                AffineEdge::Unary { child } => {
                    let c = &self.nodes[*child].system;
                    if !implied(&node.system, c) {
                        return Err(DagError::Other(v, "weakening edge does not imply its child".into()));
                    }
                    if let Some(p) = (0..1u64 << n).find(|&p| sat(&node.system, p) && !sat(c, p)) {
                        return Err(DagError::Cover { node: v, x: p as usize, y: 0 });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("dag serializes")
    }
}

/// One node per proof line, labeled by the subspace falsifying its clause.
/// A resolution step on pivot `P` branches on `P`: `P = 0` leads to the
/// premise holding `(P = 1)`. Weakenings become unary edges.
pub fn resplus_to_affine_dag(proof: &ResPlusProof) -> Result<AffineDag, ProofError> {
    if proof.lines.is_empty() {
        return Err(ProofError::Empty);
    }
    let nodes = proof
        .lines
        .iter()
        .map(|line| AffineNode {
            system: line.clause.negation(),
            edge: match &line.just {
                RlinJust::Axiom(o) => AffineEdge::Leaf { output: Some(*o) },
                RlinJust::Res { j, k, pivot } => AffineEdge::Branch {
                    query: pivot.clone(),
                    children: [*j, *k],
                },
                RlinJust::Weaken(j) => AffineEdge::Unary { child: *j },
            },
        })
        .collect();
    Ok(AffineDag {
        num_vars: proof.num_vars,
        nodes,
        root: proof.lines.len() - 1,
    })
}
