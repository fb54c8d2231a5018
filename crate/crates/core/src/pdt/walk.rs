use rand::Rng;
use serde::Serialize;

use super::tree::{ParityDecisionTree, PdtNode};
use super::{NonEdgeInstance, PdtError};
use crate::bits::BitSet;
use crate::f2::{AffineRestriction, Equation, LinearForm, LinearSystem, RestrictionError};
use crate::graph::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Success,
    /// Two candidates from distinct entries of `C` that are not adjacent.
    Fail(VertexId, VertexId),
}

/// One loop iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Step {
    /// The substituted query was the constant `value`.
    Implied { node: usize, value: bool },
    /// Coordinate `(block, bit)` was chosen and `y` sampled. `branch` is `None`
    /// when the bit flip of `y` left the common neighborhood.
    Sampled {
        node: usize,
        block: usize,
        bit: usize,
        y: usize,
        branch: Option<bool>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct WalkTranscript {
    pub outcome: Outcome,
    /// Leaf the walk stopped at.
    pub node: usize,
    /// Nodes visited, root first.
    pub path: Vec<usize>,
    pub c: Vec<Vec<VertexId>>,
    pub l: LinearSystem,
    pub free: BitSet,
    /// `L` solved for the fixed blocks in terms of the free ones.
    pub rho: AffineRestriction,
    pub trace: Vec<Step>,
}

impl WalkTranscript {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn is_success(&self) -> bool {
        self.outcome == Outcome::Success
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    /// Checks the three simulation properties, plus the bookkeeping ones: every
    /// entry of `C` has one or two vertices and each iteration frees at most one
    /// block. Returns a description of the first violation.
    pub fn check_invariants(&self, inst: &NonEdgeInstance, tree: &ParityDecisionTree) -> Result<(), String> {
        let domain = inst.free_blocks();
        let fixed = self.rho.fixed_blocks();
        // (1) L determines exactly the blocks of the domain outside F, as affine
        // functions of F, and is equivalent to rho.
        let mut expect = domain.clone();
        expect.difference_with(&self.free);
        if fixed != expect {
            return Err(format!("fixed blocks {fixed:?} differ from domain minus F {expect:?}"));
        }
        if !self.rho.is_normalized() || self.rho.free_blocks() != &self.free {
            return Err("restriction is not normalized over F".into());
        }
        let rs = self.rho.as_system();
        if !self.l.implies_system(&rs) || !rs.implies_system(&self.l) {
            return Err("L and its solved form disagree".into());
        }
        // (2) every completion places each fixed block inside N^∩(M, i).
        for i in fixed.iter() {
            let cn = inst.neighborhood(i).expect("fixed blocks are free in the domain");
            for y in block_image(&self.rho, i) {
                if !cn.contains(y) {
                    return Err(format!("block {i} can take {y}, outside the common neighborhood"));
                }
            }
        }
        // (3) L implies every parity constraint on the path.
        let path = tree.path_constraints(self.node).ok_or("node not in tree")?;
        if let Some(e) = path.iter().find(|e| !self.l.implies(e)) {
            return Err(format!("L does not imply the path constraint on {}", e.form.to_bitstring()));
        }
        if self.c.iter().any(|e| e.is_empty() || e.len() > 2) {
            return Err("C entry of size outside {1, 2}".into());
        }
        let sampled = self.trace.iter().filter(|s| matches!(s, Step::Sampled { .. })).count();
        if sampled != self.c.len() || sampled != expect.count() {
            return Err("number of freed blocks differs from sampled iterations".into());
        }
        Ok(())
    }
}

/// All vertex indices block `i` can take under `rho` as the free variables range.
pub(crate) fn block_image(rho: &AffineRestriction, i: usize) -> Vec<usize> {
    let layout = rho.layout();
    let bits = layout.bits;
    let mut offset = 0usize;
    let mut gens: Vec<usize> = Vec::new();
    let mut by_var: std::collections::BTreeMap<usize, usize> = Default::default();
    for (j, v) in layout.block_vars(i).enumerate() {
        let (f, c) = rho.expr(v).expect("block is fixed");
        let mask = 1usize << (bits - 1 - j);
        if *c {
            offset |= mask;
        }
        for u in f.vars() {
            *by_var.entry(u).or_default() ^= mask;
        }
    }
    // Reduce the generator columns to a basis, then enumerate the coset.
    for mut g in by_var.into_values() {
        for &b in &gens {
            g = g.min(g ^ b);
        }
        if g != 0 {
            gens.push(g);
        }
    }
    (0..1usize << gens.len())
        .map(|w| {
            gens.iter()
                .enumerate()
                .filter(|(t, _)| (w >> t) & 1 == 1)
                .fold(offset, |acc, (_, g)| acc ^ g)
        })
        .collect()
}

/// Runs the random walk simulator on `tree` for `NonEdge_M`.
pub fn simulate_walk<R: Rng>(inst: &NonEdgeInstance, tree: &ParityDecisionTree, rng: &mut R) -> Result<WalkTranscript, PdtError> {
    let layout = inst.layout();
    if tree.layout != layout {
        return Err(PdtError::Layout {
            want: layout,
            got: tree.layout,
        });
    }
    let dims = layout.dims();
    let bits = layout.bits;
    let mut free = inst.free_blocks();
    let mut rho = AffineRestriction::new(layout, free.clone());
    let mut l = LinearSystem::new(dims);
    let mut c: Vec<Vec<VertexId>> = Vec::new();
    let mut trace = Vec::new();
    let mut v = tree.root();
    let mut path = vec![v];
    while let PdtNode::Query { form, children } = &tree.nodes[v] {
        let (p, pc) = rho.substitute(form).map_err(|e| match e {
            RestrictionError::Unassigned(b) => PdtError::QueryOutsideDomain(b),
            other => other.into(),
        })?;
        let Some(var) = p.vars().next() else {
            trace.push(Step::Implied { node: v, value: pc });
            v = children[pc as usize];
            path.push(v);
            continue;
        };
        // Free variables are ordered block-major, so the first is the least (i, j).
        let (i, j) = (layout.block_of(var), layout.bit_of(var));
        let list = inst.neighborhood_list(i);
        if list.is_empty() {
            return Err(PdtError::EmptyNeighborhood(i));
        }
        let y = list[rng.gen_range(0..list.len())];
        let bit_of = |h: usize| (y >> (bits - 1 - h)) & 1 == 1;
        for h in (0..bits).filter(|&h| h != j) {
            l.push(Equation::new(LinearForm::var(dims, layout.var(i, h)), bit_of(h)));
        }
        let flip = y ^ (1 << (bits - 1 - j));
        let node = v;
        if !inst.neighborhood(i).expect("free block").contains(flip) {
            l.push(Equation::new(LinearForm::var(dims, var), bit_of(j)));
            c.push(vec![VertexId::new(i, y)]);
            rho.fix_block_const(i, y)?;
            trace.push(Step::Sampled {
                node,
                block: i,
                bit: j,
                y,
                branch: None,
            });
        } else {
            let b: bool = rng.gen();
            l.push(Equation::new(p.clone(), b ^ pc));
            c.push(vec![VertexId::new(i, y), VertexId::new(i, flip)]);
            // Solve P = b for x_{i,j}: the rest of block i is already y.
            let mut rest = p.clone();
            let mut value = b ^ pc;
            for u in layout.block_vars(i) {
                if rest.0.contains(u) {
                    rest.0.remove(u);
                    if u != var {
                        value ^= bit_of(layout.bit_of(u));
                    }
                }
            }
            let exprs = (0..bits)
                .map(|h| {
                    if h == j {
                        (rest.clone(), value)
                    } else {
                        (LinearForm::zero(dims), bit_of(h))
                    }
                })
                .collect();
            rho.fix_block(i, exprs)?;
            trace.push(Step::Sampled {
                node,
                block: i,
                bit: j,
                y,
                branch: Some(b),
            });
            v = children[b as usize];
            path.push(v);
        }
        free.remove(i);
    }
    let mut outcome = Outcome::Success;
    'outer: for (a, ea) in c.iter().enumerate() {
        for eb in &c[a + 1..] {
            for &u in ea {
                for &w in eb {
                    if !inst.has_edge(u, w) {
                        outcome = Outcome::Fail(u, w);
                        break 'outer;
                    }
                }
            }
        }
    }
    Ok(WalkTranscript {
        outcome,
        node: v,
        path,
        c,
        l,
        free,
        rho,
        trace,
    })
}
