use rayon::prelude::*;
use serde::Serialize;

use super::rect::{RectIndex, Side, Width, WidthMode};
use super::triangle::{Triangle, TriangleDag};
use super::BottleneckError;
use crate::bits::BitSet;

/// State around one node of the bottleneck map construction.
#[derive(Debug, Clone, Serialize)]
pub struct MuStep {
    pub node: usize,
    /// Survivors `X'`, `Y'` right before the node is processed.
    pub x_before: BitSet,
    pub y_before: BitSet,
    pub assigned_x: Vec<usize>,
    pub assigned_y: Vec<usize>,
    /// Largest block width in `T'_u` over all survivors on entry.
    pub entry_width: Width,
}

#[derive(Debug, Clone, Serialize)]
pub struct MuMap {
    pub q: usize,
    pub mu_x: Vec<Option<usize>>,
    pub mu_y: Vec<Option<usize>>,
    /// In processing order, sinks first.
    pub steps: Vec<MuStep>,
}

impl MuMap {
    pub fn assigned(&self) -> usize {
        self.mu_x.iter().chain(&self.mu_y).filter(|a| a.is_some()).count()
    }

    /// `|X ⊔ Y|`.
    pub fn domain_size(&self) -> usize {
        self.mu_x.len() + self.mu_y.len()
    }

    /// Whether every survivor had width at most `2q` in `T'_u` on entry to
    /// every node `u`; widths only shrink afterwards.
    pub fn survivor_claim(&self) -> bool {
        self.steps.iter().all(|s| !s.entry_width.exceeds(2 * self.q))
    }

    /// The step for a DAG node.
    pub fn step(&self, node: usize) -> Option<&MuStep> {
        self.steps.iter().find(|s| s.node == node)
    }

    /// Most inputs mapped to a single node.
    pub fn max_per_node(&self) -> usize {
        self.steps
            .iter()
            .map(|s| s.assigned_x.len() + s.assigned_y.len())
            .max()
            .unwrap_or(0)
    }
}

/// `T_u ∩ (xs × ys)` sliced at `x`.
pub fn slice_x(tri: &Triangle, x: usize, ys: &BitSet) -> BitSet {
    BitSet::from_indices(ys.len(), ys.iter().filter(|&y| tri.contains(x, y)))
}

/// `T_u ∩ (xs × ys)` sliced at `y`.
pub fn slice_y(tri: &Triangle, y: usize, xs: &BitSet) -> BitSet {
    BitSet::from_indices(xs.len(), xs.iter().filter(|&x| tri.contains(x, y)))
}

fn widths(idx: &RectIndex, tri: &Triangle, side: Side, zs: &BitSet, other: &BitSet) -> Result<Vec<(usize, Width)>, BottleneckError> {
    let zs: Vec<usize> = zs.iter().collect();
    zs.par_iter()
        .map(|&z| {
            let slice = match side {
                Side::X => slice_x(tri, z, other),
                Side::Y => slice_y(tri, z, other),
            };
            Ok((z, idx.width(side, z, &slice, WidthMode::Exact)?))
        })
        .collect()
}

/// Visits the nodes sinks first. At node `u`, every surviving `x` whose slice
/// of `T'_u = T_u ∩ (X' × Y')` has block width above `q` is mapped to `u` and
/// removed, then likewise every surviving `y` against the updated `X'`.
/// Removing an `x` leaves the other `x` slices unchanged, so each pass is
/// computed in parallel and applied in index order.
pub fn build_mu(dag: &TriangleDag, idx: &RectIndex, q: usize) -> Result<MuMap, BottleneckError> {
    let size = idx.dom.size();
    for (v, node) in dag.nodes.iter().enumerate() {
        if node.tri.nx() != size || node.tri.ny() != size {
            return Err(BottleneckError::Domain(format!("node {v} is not over the {size} x {size} domain")));
        }
    }
    let order = dag.topological_order()?;
    let mut xs = BitSet::full(size);
    let mut ys = BitSet::full(size);
    let mut mu_x = vec![None; size];
    let mut mu_y = vec![None; size];
    let mut steps = Vec::with_capacity(order.len());
    for &u in order.iter().rev() {
        let tri = &dag.nodes[u].tri;
        let (x_before, y_before) = (xs.clone(), ys.clone());
        let wx = widths(idx, tri, Side::X, &xs, &ys)?;
        let wy_entry = widths(idx, tri, Side::Y, &ys, &xs)?;
        let entry_width = wx
            .iter()
            .chain(&wy_entry)
            .map(|&(_, w)| w)
            .max()
            .unwrap_or(Width::Finite(0));
        let mut assigned_x = Vec::new();
        for (x, w) in wx {
            if w.exceeds(q) {
                mu_x[x] = Some(u);
                xs.remove(x);
                assigned_x.push(x);
            }
        }
        let wy = if assigned_x.is_empty() {
            wy_entry
        } else {
            widths(idx, tri, Side::Y, &ys, &xs)?
        };
        let mut assigned_y = Vec::new();
        for (y, w) in wy {
            if w.exceeds(q) {
                mu_y[y] = Some(u);
                ys.remove(y);
                assigned_y.push(y);
            }
        }
        steps.push(MuStep {
            node: u,
            x_before,
            y_before,
            assigned_x,
            assigned_y,
            entry_width,
        });
    }
    Ok(MuMap { q, mu_x, mu_y, steps })
}
