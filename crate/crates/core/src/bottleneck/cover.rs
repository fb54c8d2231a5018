use serde::Serialize;

use super::mu::{slice_x, slice_y};
use super::rect::{RectIndex, Side, Width, WidthMode};
use super::triangle::Triangle;
use super::BottleneckError;
use crate::bits::BitSet;
use crate::stats::CsvRow;

/// Default cap on the number of covering tree nodes.
pub const DEFAULT_NODE_CAP: usize = 1 << 20;

/// A node labeled by `T' ∩ (xs × ys)`; the path from the root fixes `xs`
/// to the `X` sides of its edge labels and removes their `Y` sides from `ys`.
#[derive(Debug, Clone, Serialize)]
pub struct CoverNode {
    pub xs: BitSet,
    pub ys: BitSet,
    pub parent: Option<usize>,
    /// Rectangle id labeling the edge from the parent.
    pub label: Option<usize>,
    pub children: Vec<usize>,
    /// The `y` chosen when the node was expanded.
    pub pivot: Option<usize>,
    /// Blocks mentioned by the labels on the root path.
    pub blocks: u64,
}

impl CoverNode {
    pub fn block_depth(&self) -> usize {
        self.blocks.count_ones() as usize
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoveringTree {
    pub tri: Triangle,
    pub nodes: Vec<CoverNode>,
}

fn nonempty(tri: &Triangle, xs: &BitSet, ys: &BitSet) -> bool {
    let a = xs.iter().map(|x| tri.a[x]).min();
    let b = ys.iter().map(|y| tri.b[y]).max();
    matches!((a, b), (Some(a), Some(b)) if a <= b)
}

/// Grows the tree of potential coverings of `T' = tri ∩ (xs × ys)`.
/// Requires every `y` in `ys` to have block width at most `2q` in `T'`.
/// Open nodes are expanded last-in first-out; the chosen `y` maximizes
/// `|T^y|` with ties to the least index.
pub fn covering_tree(
    tri: &Triangle,
    xs: &BitSet,
    ys: &BitSet,
    idx: &RectIndex,
    q: usize,
    node_cap: usize,
) -> Result<CoveringTree, BottleneckError> {
    for y in ys.iter() {
        let w = idx.width(Side::Y, y, &slice_y(tri, y, xs), WidthMode::Exact)?;
        if w.exceeds(2 * q) {
            return Err(BottleneckError::Precondition { y, width: w });
        }
    }
    let mut nodes = vec![CoverNode {
        xs: xs.clone(),
        ys: ys.clone(),
        parent: None,
        label: None,
        children: Vec::new(),
        pivot: None,
        blocks: 0,
    }];
    let mut open = if nonempty(tri, xs, ys) { vec![0] } else { vec![] };
    while let Some(t) = open.pop() {
        let (txs, tys) = (nodes[t].xs.clone(), nodes[t].ys.clone());
        let mut sorted_a: Vec<i64> = txs.iter().map(|x| tri.a[x]).collect();
        sorted_a.sort_unstable();
        let y = tys
            .iter()
            .max_by_key(|&y| (sorted_a.partition_point(|&a| a <= tri.b[y]), std::cmp::Reverse(y)))
            .expect("nonempty node");
        let slice = slice_y(tri, y, &txs);
        let cover = idx
            .minimal_cover(Side::Y, y, &slice)?
            .ok_or(BottleneckError::Precondition { y, width: Width::Infinite })?;
        nodes[t].pivot = Some(y);
        let mut spawned = Vec::with_capacity(cover.len());
        for id in cover {
            let (i, j) = idx.rects[id].blocks();
            let mut cxs = txs.clone();
            cxs.intersect_with(idx.part(Side::X, id));
            let mut cys = tys.clone();
            cys.difference_with(idx.part(Side::Y, id));
            let c = nodes.len();
            if c >= node_cap {
                return Err(BottleneckError::TooLarge(node_cap));
            }
            let live = nonempty(tri, &cxs, &cys);
            nodes.push(CoverNode {
                xs: cxs,
                ys: cys,
                parent: Some(t),
                label: Some(id),
                children: Vec::new(),
                pivot: None,
                blocks: nodes[t].blocks | 1 << i | 1 << j,
            });
            nodes[t].children.push(c);
            if live {
                spawned.push(c);
            }
        }
        open.extend(spawned.into_iter().rev());
    }
    Ok(CoveringTree { tri: tri.clone(), nodes })
}

/// Outcome of the structural checks on a covering tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeChecks {
    /// Points of `T'` not inside any edge label.
    pub uncovered: usize,
    /// Pairs of sibling nodes sharing a point of `T'`.
    pub overlapping_siblings: usize,
    /// `x` with nonempty `T'^x` that do not have exactly one covering path.
    pub non_unique_x: usize,
    /// Largest number of covering paths for a single `x`.
    pub max_paths: usize,
    /// Nodes with out-degree above one and a child of equal block depth.
    pub outdegree_violations: usize,
}

impl TreeChecks {
    pub fn coverage(&self) -> bool {
        self.uncovered == 0
    }

    pub fn nesting(&self) -> bool {
        self.overlapping_siblings == 0
    }

    pub fn unique_paths(&self) -> bool {
        self.non_unique_x == 0
    }

    pub fn outdegree(&self) -> bool {
        self.outdegree_violations == 0
    }

    pub fn all(&self) -> bool {
        self.coverage() && self.nesting() && self.unique_paths() && self.outdegree()
    }
}

impl CoveringTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn root(&self) -> &CoverNode {
        &self.nodes[0]
    }

    /// Whether `(x, y)` lies in the set labeling node `t`.
    pub fn node_contains(&self, t: usize, x: usize, y: usize) -> bool {
        let n = &self.nodes[t];
        n.xs.contains(x) && n.ys.contains(y) && self.tri.contains(x, y)
    }

    /// Exhaustive checks. Containment of a child's set in its parent's holds by
    /// construction, so the nesting property reduces to disjoint siblings. An
    /// `x` is covered at `t` when its path labels hold `x` and cover `T'^x`,
    /// i.e. `x` is in `t`'s `xs` and `T_t^x` is empty; a covering path ends at
    /// such a `t` whose parent does not cover `x`.
    pub fn check(&self, idx: &RectIndex) -> TreeChecks {
        let root = self.root();
        let mut uncovered = 0;
        let mut non_unique_x = 0;
        let mut max_paths = 0;
        let labels: Vec<usize> = self.nodes.iter().filter_map(|n| n.label).collect();
        for x in root.xs.iter() {
            let tx = slice_x(&self.tri, x, &root.ys);
            let mut covered = BitSet::new(tx.len());
            for &id in &labels {
                if idx.part(Side::X, id).contains(x) {
                    covered.union_with(idx.part(Side::Y, id));
                }
            }
            let mut left = tx.clone();
            left.difference_with(&covered);
            uncovered += left.count();
            if tx.first().is_none() {
                continue;
            }
            let has_points = |t: usize| {
                let n = &self.nodes[t];
                n.xs.contains(x) && n.ys.iter().any(|y| self.tri.contains(x, y))
            };
            let paths = (1..self.nodes.len())
                .filter(|&t| {
                    let n = &self.nodes[t];
                    n.xs.contains(x) && !has_points(t) && has_points(n.parent.expect("non-root"))
                })
                .count();
            max_paths = max_paths.max(paths);
            if paths != 1 {
                non_unique_x += 1;
            }
        }
        let mut overlapping_siblings = 0;
        let mut outdegree_violations = 0;
        for n in &self.nodes {
            for (s, &c1) in n.children.iter().enumerate() {
                for &c2 in &n.children[s + 1..] {
                    let mut xs = self.nodes[c1].xs.clone();
                    xs.intersect_with(&self.nodes[c2].xs);
                    let mut ys = self.nodes[c1].ys.clone();
                    ys.intersect_with(&self.nodes[c2].ys);
                    if nonempty(&self.tri, &xs, &ys) {
                        overlapping_siblings += 1;
                    }
                }
            }
            if n.children.len() > 1 && n.children.iter().any(|&c| self.nodes[c].block_depth() <= n.block_depth()) {
                outdegree_violations += 1;
            }
        }
        TreeChecks {
            uncovered,
            overlapping_siblings,
            non_unique_x,
            max_paths,
            outdegree_violations,
        }
    }

    /// Node counts per block depth after contracting every node that has a
    /// child of equal block depth into that child.
    pub fn census(&self, n: usize) -> Census {
        let kept = self.nodes.iter().filter(|t| {
            !t.children
                .iter()
                .any(|&c| self.nodes[c].block_depth() == t.block_depth())
        });
        let mut counts = Vec::new();
        for t in kept {
            let d = t.block_depth();
            if counts.len() <= d {
                counts.resize(d + 1, 0);
            }
            counts[d] += 1;
        }
        let base = (n as f64).sqrt() / 2.0;
        let bounds = (0..counts.len()).map(|d| base.powi(d as i32)).collect();
        Census { counts, bounds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Census {
    pub counts: Vec<usize>,
    /// `(√n/2)^d`.
    pub bounds: Vec<f64>,
}

impl Census {
    /// Depths whose count exceeds the bound.
    pub fn exceeded(&self) -> Vec<usize> {
        (0..self.counts.len())
            .filter(|&d| self.counts[d] as f64 > self.bounds[d])
            .collect()
    }

    pub fn rows(&self, n: usize, k: usize, p: f64, seed: u64) -> Vec<CsvRow> {
        self.counts
            .iter()
            .zip(&self.bounds)
            .enumerate()
            .map(|(d, (&c, &b))| {
                CsvRow {
                    experiment_id: "block_depth_census".into(),
                    n,
                    k,
                    p,
                    params: Vec::new(),
                    empirical_value: c as f64,
                    reference_bound: b,
                    trials: 1,
                    seed,
                }
                .param("depth", d)
            })
            .collect()
    }
}

/// `2q²s ≤ √n/4`.
pub fn census_hypothesis(n: usize, q: usize, s: usize) -> bool {
    (2 * q * q * s) as f64 <= (n as f64).sqrt() / 4.0
}
