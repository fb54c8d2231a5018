//! Deterministic two-party protocols over the `X × Y` split of the block
//! encoding: explicit protocol trees, min-entropy and subcube-likeness of
//! rectangles, distributional error and the per-leaf bookkeeping.

pub mod protocol;
pub mod spread;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use protocol::{
    distributional_error, valid_output, Audit, ErrorEstimate, ErrorMode, NodeKind, ProtocolNode, ProtocolTree, Speaker,
    DEFAULT_PAIR_BUDGET,
};
pub use spread::{fixed_coords, min_entropy, side_spread, subcube_like_check, SideSpread, SpreadReport, DEFAULT_FREE_BUDGET};

use crate::bits::BitSet;
use crate::bottleneck::Domain;
use crate::graph::{BlockGraph, VertexId};
use crate::stats::CsvRow;

#[derive(Debug, Error)]
pub enum CommError {
    #[error("min-entropy of an empty set")]
    EmptySet,
    #[error("{free} free coordinates exceed the budget of {budget}")]
    Budget { free: usize, budget: usize },
    #[error("{pairs} input pairs exceed the budget of {budget}")]
    TooLarge { pairs: u64, budget: u64 },
    #[error("malformed protocol: {0}")]
    Malformed(String),
}

/// Blocks owning at least one of `coords`.
pub fn blocks_of(dom: &Domain, coords: &[usize]) -> Vec<usize> {
    let mut b: Vec<usize> = coords.iter().map(|c| c / dom.h).collect();
    b.dedup();
    b
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafRecord {
    pub leaf: usize,
    pub depth: usize,
    /// `Pr[(x, y) ∈ R_ℓ]`.
    pub mass: f64,
    /// Blocks of the fixed coordinates of either side.
    pub d: Vec<usize>,
    pub a: usize,
    pub b: usize,
    pub safe: bool,
    /// Non-edge probability between the vertices selected in blocks `a`, `b`
    /// for `(x, y)` uniform on `R_ℓ`.
    pub p_ab: f64,
    /// `None` when a side has more free coordinates than the budget.
    pub spread: Option<SpreadReport>,
}

impl LeafRecord {
    pub fn subcube_like(&self) -> bool {
        self.spread.as_ref().is_some_and(|s| s.subcube_like)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafCensus {
    pub gamma: f64,
    pub s: usize,
    /// `s · |Σ|^{−γ}`.
    pub bound: f64,
    pub leaves: Vec<LeafRecord>,
}

/// Worst leaf of one kind against the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub checked: usize,
    pub violations: usize,
    pub max_p: f64,
}

impl LeafCensus {
    fn check(&self, safe: bool) -> BoundCheck {
        let kind: Vec<&LeafRecord> = self
            .leaves
            .iter()
            .filter(|l| l.safe == safe && l.subcube_like())
            .collect();
        BoundCheck {
            checked: kind.len(),
            violations: kind.iter().filter(|l| l.p_ab > self.bound + 1e-12).count(),
            max_p: kind.iter().map(|l| l.p_ab).fold(0.0, f64::max),
        }
    }

    /// Subcube-like leaves with `{a, b} ⊆ D_ℓ`.
    pub fn safe_check(&self) -> BoundCheck {
        self.check(true)
    }

    /// Subcube-like leaves with `{a, b} ⊄ D_ℓ`.
    pub fn dangerous_check(&self) -> BoundCheck {
        self.check(false)
    }

    /// Total mass of leaves with `{a, b} ⊆ D_ℓ`.
    pub fn safe_mass(&self) -> f64 {
        self.leaves.iter().filter(|l| l.safe).map(|l| l.mass).sum()
    }

    pub fn rows(&self, n: usize, k: usize, p: f64, seed: u64) -> Vec<CsvRow> {
        self.leaves
            .iter()
            .map(|l| {
                CsvRow {
                    experiment_id: "comm_leaf_census".into(),
                    n,
                    k,
                    p,
                    params: Vec::new(),
                    empirical_value: l.p_ab,
                    reference_bound: self.bound,
                    trials: 1,
                    seed,
                }
                .param("leaf", l.leaf)
                .param("depth", l.depth)
                .param("mass", l.mass)
                .param("d", l.d.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" "))
                .param("a", l.a)
                .param("b", l.b)
                .param("safe", l.safe)
                .param("subcube_like", l.subcube_like())
                .param("gamma", self.gamma)
                .param("s", self.s)
            })
            .collect()
    }
}

/// Exact `p_{a,b}` over `xs × ys`: the rectangle factors, so only the joint
/// histograms of `(x_a, x_b)` and `(y_a, y_b)` matter.
pub fn pair_nonedge_probability(dom: &Domain, g: &BlockGraph, xs: &BitSet, ys: &BitSet, a: usize, b: usize) -> f64 {
    let sig = dom.sigma();
    let hist = |s: &BitSet| {
        let mut h = vec![0usize; sig * sig];
        for z in s.iter() {
            h[dom.half(z, a) * sig + dom.half(z, b)] += 1;
        }
        h
    };
    let (hx, hy) = (hist(xs), hist(ys));
    let mut non = 0usize;
    for (ix, &cx) in hx.iter().enumerate().filter(|(_, &c)| c > 0) {
        for (iy, &cy) in hy.iter().enumerate().filter(|(_, &c)| c > 0) {
            let u = VertexId::new(a, ((ix / sig) << dom.h) | (iy / sig));
            let v = VertexId::new(b, ((ix % sig) << dom.h) | (iy % sig));
            if !g.has_edge(u, v) {
                non += cx * cy;
            }
        }
    }
    non as f64 / (xs.count() * ys.count()) as f64
}

/// One record per leaf with a nonempty rectangle and an output in two
/// distinct blocks.
pub fn leaf_census(tree: &ProtocolTree, g: &BlockGraph, s: usize, gamma: f64, budget: usize) -> Result<LeafCensus, CommError> {
    let dom = tree.dom;
    if g.n() != dom.n || g.k() != dom.k {
        return Err(CommError::Malformed("graph and protocol disagree on n or k".into()));
    }
    let m = dom.k * dom.h;
    let total = (dom.size() * dom.size()) as f64;
    let leaves: Vec<usize> = tree.leaves();
    let records = leaves
        .par_iter()
        .filter_map(|&l| {
            let node = &tree.nodes()[l];
            let [u, v] = tree.output(l).expect("leaf");
            if node.xs.count() == 0 || node.ys.count() == 0 || u.block == v.block {
                return None;
            }
            let mut fixed = fixed_coords(&node.xs, m);
            fixed.extend(fixed_coords(&node.ys, m));
            fixed.sort_unstable();
            let d = blocks_of(&dom, &fixed);
            let (a, b) = (u.block, v.block);
            let spread = match subcube_like_check(&node.xs, &node.ys, m, gamma, budget) {
                Ok(r) => Some(r),
                Err(CommError::Budget { .. }) => None,
                Err(e) => return Some(Err(e)),
            };
            Some(Ok(LeafRecord {
                leaf: l,
                depth: node.depth,
                mass: (node.xs.count() * node.ys.count()) as f64 / total,
                safe: d.contains(&a) && d.contains(&b),
                d,
                a,
                b,
                p_ab: pair_nonedge_probability(&dom, g, &node.xs, &node.ys, a, b),
                spread,
            }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LeafCensus {
        gamma,
        s,
        bound: s as f64 * (dom.sigma() as f64).powf(-gamma),
        leaves: records,
    })
}
