use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::BottleneckError;
use crate::bits::BitSet;
use crate::graph::{self, BlockGraph, VertexId};

/// `X = Y = Σ^k` with `Σ = {0,1}^h`, `h = log(n)/2`. Half `i` of an index is
/// bits `i*h .. i*h + h`, the first of them most significant, so that `(x_i, y_i)`
/// is vertex `(x_i << h) | y_i` of block `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Domain {
    pub n: usize,
    pub k: usize,
    pub h: usize,
}

impl Domain {
    pub fn new(n: usize, k: usize) -> Result<Self, BottleneckError> {
        let h = graph::half_bits(n)?;
        if k * h > 24 {
            return Err(BottleneckError::Domain(format!("|X| = 2^{} is too large to enumerate", k * h)));
        }
        Ok(Self { n, k, h })
    }

    /// `|X| = |Y|`.
    pub fn size(&self) -> usize {
        1 << (self.k * self.h)
    }

    pub fn sigma(&self) -> usize {
        1 << self.h
    }

    pub fn half(&self, z: usize, i: usize) -> usize {
        (0..self.h).fold(0, |acc, a| (acc << 1) | ((z >> (i * self.h + a)) & 1))
    }

    pub fn with_half(&self, z: usize, i: usize, value: usize) -> usize {
        let mut z = z;
        for a in 0..self.h {
            let bit = (value >> (self.h - 1 - a)) & 1;
            let pos = i * self.h + a;
            z = (z & !(1 << pos)) | (bit << pos);
        }
        z
    }

    /// Index whose halves are `halves`.
    pub fn compose(&self, halves: &[usize]) -> usize {
        halves.iter().enumerate().fold(0, |z, (i, &v)| self.with_half(z, i, v))
    }

    pub fn vertex(&self, x: usize, y: usize, i: usize) -> VertexId {
        VertexId::new(i, (self.half(x, i) << self.h) | self.half(y, i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    X,
    Y,
}

/// `R_{u,v}`: inputs selecting `u` in its block and `v` in its block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SolutionRectangle {
    pub u: VertexId,
    pub v: VertexId,
}

impl SolutionRectangle {
    pub fn blocks(&self) -> (usize, usize) {
        (self.u.block, self.v.block)
    }

    fn halves(&self, dom: &Domain, side: Side) -> (usize, usize) {
        let pick = |w: VertexId| match side {
            Side::X => w.index >> dom.h,
            Side::Y => w.index & (dom.sigma() - 1),
        };
        (pick(self.u), pick(self.v))
    }

    pub fn contains_side(&self, dom: &Domain, side: Side, z: usize) -> bool {
        let (a, b) = self.halves(dom, side);
        dom.half(z, self.u.block) == a && dom.half(z, self.v.block) == b
    }

    pub fn contains(&self, dom: &Domain, x: usize, y: usize) -> bool {
        self.contains_side(dom, Side::X, x) && self.contains_side(dom, Side::Y, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Width {
    Finite(usize),
    Infinite,
}

impl Width {
    pub fn exceeds(self, q: usize) -> bool {
        self > Width::Finite(q)
    }
}

impl std::fmt::Display for Width {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Width::Finite(w) => write!(f, "{w}"),
            Width::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthMode {
    Exact,
    Greedy,
}

/// Default cap on `k` for exact block width.
pub const EXACT_BLOCK_BUDGET: usize = 16;

/// `𝓡` for a graph, sorted by `(u, v)`, with each rectangle's two sides
/// materialized and an index from a side's pair of halves to rectangles.
#[derive(Debug, Clone)]
pub struct RectIndex {
    pub dom: Domain,
    pub rects: Vec<SolutionRectangle>,
    parts: [Vec<BitSet>; 2],
    lookup: [HashMap<(usize, usize, usize, usize), Vec<usize>>; 2],
    pub budget: usize,
}

fn side_ix(side: Side) -> usize {
    match side {
        Side::X => 0,
        Side::Y => 1,
    }
}

impl RectIndex {
    pub fn new(g: &BlockGraph) -> Result<Self, BottleneckError> {
        let dom = Domain::new(g.n(), g.k())?;
        let (n, k) = (g.n(), g.k());
        let mut rects = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                for a in 0..n {
                    for b in 0..n {
                        let (u, v) = (VertexId::new(i, a), VertexId::new(j, b));
                        if !g.has_edge(u, v) {
                            rects.push(SolutionRectangle { u, v });
                        }
                    }
                }
            }
        }
        Ok(Self::from_rects(dom, rects))
    }

    pub fn from_rects(dom: Domain, mut rects: Vec<SolutionRectangle>) -> Self {
        rects.sort();
        rects.dedup();
        let size = dom.size();
        let mut parts = [Vec::new(), Vec::new()];
        let mut lookup = [HashMap::new(), HashMap::new()];
        for side in [Side::X, Side::Y] {
            let s = side_ix(side);
            parts[s] = rects
                .par_iter()
                .map(|r| BitSet::from_indices(size, (0..size).filter(|&z| r.contains_side(&dom, side, z))))
                .collect();
            for (id, r) in rects.iter().enumerate() {
                let (a, b) = r.halves(&dom, side);
                lookup[s]
                    .entry((r.u.block, r.v.block, a, b))
                    .or_insert_with(Vec::new)
                    .push(id);
            }
        }
        Self {
            dom,
            rects,
            parts,
            lookup,
            budget: EXACT_BLOCK_BUDGET,
        }
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    /// The `side` part of rectangle `id`.
    pub fn part(&self, side: Side, id: usize) -> &BitSet {
        &self.parts[side_ix(side)][id]
    }

    /// Rectangles whose `side` part contains `z`, by block pair in order.
    pub fn through(&self, side: Side, z: usize) -> Vec<usize> {
        let dom = &self.dom;
        let mut out = Vec::new();
        for i in 0..dom.k {
            for j in i + 1..dom.k {
                if let Some(ids) = self.lookup[side_ix(side)].get(&(i, j, dom.half(z, i), dom.half(z, j))) {
                    out.extend_from_slice(ids);
                }
            }
        }
        out
    }

    /// Per block pair `(i, j)`, `i < j`, the union of the opposite parts of
    /// rectangles through `z`.
    fn pair_cover(&self, side: Side, z: usize) -> Vec<((usize, usize), BitSet)> {
        let other = match side {
            Side::X => Side::Y,
            Side::Y => Side::X,
        };
        let mut out: Vec<((usize, usize), BitSet)> = Vec::new();
        for id in self.through(side, z) {
            let key = self.rects[id].blocks();
            match out.last_mut() {
                Some((k, set)) if *k == key => set.union_with(self.part(other, id)),
                _ => out.push((key, self.part(other, id).clone())),
            }
        }
        out
    }

    fn covers(pairs: &[((usize, usize), BitSet)], w: u64, slice: &BitSet) -> bool {
        let mut left = slice.clone();
        for ((i, j), set) in pairs {
            if (w >> i) & 1 == 1 && (w >> j) & 1 == 1 {
                left.difference_with(set);
            }
        }
        left.first().is_none()
    }

    /// Least `|W|` such that rectangles through `z` with blocks in `W` cover
    /// `slice`, with the lexicographically least such `W` (as a sorted list).
    fn exact_cover_blocks(&self, side: Side, z: usize, slice: &BitSet) -> Result<Option<u64>, BottleneckError> {
        let k = self.dom.k;
        if k > self.budget.min(30) {
            return Err(BottleneckError::BudgetExceeded { k, budget: self.budget });
        }
        if slice.first().is_none() {
            return Ok(Some(0));
        }
        let pairs = self.pair_cover(side, z);
        if !Self::covers(&pairs, (1u64 << k) - 1, slice) {
            return Ok(None);
        }
        for size in 2..=k {
            if let Some(w) = subsets_of_size(k, size).find(|&w| Self::covers(&pairs, w, slice)) {
                return Ok(Some(w));
            }
        }
        unreachable!("the full block set covers")
    }

    /// Block width of `z` for the slice `slice` (a set on the opposite side).
    pub fn width(&self, side: Side, z: usize, slice: &BitSet, mode: WidthMode) -> Result<Width, BottleneckError> {
        match mode {
            WidthMode::Exact => Ok(match self.exact_cover_blocks(side, z, slice)? {
                Some(w) => Width::Finite(w.count_ones() as usize),
                None => Width::Infinite,
            }),
            WidthMode::Greedy => Ok(self.greedy_width(side, z, slice)),
        }
    }

    /// Adds one block at a time, each maximizing the covered part of the slice.
    fn greedy_width(&self, side: Side, z: usize, slice: &BitSet) -> Width {
        if slice.first().is_none() {
            return Width::Finite(0);
        }
        let k = self.dom.k;
        let pairs = self.pair_cover(side, z);
        let covered = |w: u64| {
            let mut c = BitSet::new(slice.len());
            for ((i, j), set) in &pairs {
                if (w >> i) & 1 == 1 && (w >> j) & 1 == 1 {
                    c.union_with(set);
                }
            }
            c.intersect_with(slice);
            c.count()
        };
        let want = slice.count();
        let mut w = 0u64;
        for step in 1..=k {
            let b = (0..k)
                .filter(|b| (w >> b) & 1 == 0)
                .max_by_key(|&b| (covered(w | 1 << b), std::cmp::Reverse(b)))
                .expect("a block is left");
            w |= 1 << b;
            if covered(w) == want {
                return Width::Finite(step);
            }
        }
        Width::Infinite
    }

    /// An irredundant cover of `slice` by rectangles through `z` of least block
    /// width: blocks are the least `W`, then rectangles meeting the slice are
    /// dropped in id order while the rest still cover. `None` if uncoverable.
    pub fn minimal_cover(&self, side: Side, z: usize, slice: &BitSet) -> Result<Option<Vec<usize>>, BottleneckError> {
        let Some(w) = self.exact_cover_blocks(side, z, slice)? else {
            return Ok(None);
        };
        let other = match side {
            Side::X => Side::Y,
            Side::Y => Side::X,
        };
        let inside = |id: usize| {
            let (i, j) = self.rects[id].blocks();
            (w >> i) & 1 == 1 && (w >> j) & 1 == 1
        };
        let mut keep: Vec<usize> = self
            .through(side, z)
            .into_iter()
            .filter(|&id| inside(id) && self.part(other, id).intersects(slice))
            .collect();
        keep.sort_unstable();
        let mut t = 0;
        while t < keep.len() {
            let mut rest = BitSet::new(slice.len());
            for (s, &id) in keep.iter().enumerate() {
                if s != t {
                    rest.union_with(self.part(other, id));
                }
            }
            if slice.is_subset(&rest) {
                keep.remove(t);
            } else {
                t += 1;
            }
        }
        Ok(Some(keep))
    }
}

/// `k`-bit masks with `size` ones, in lexicographic order of their sorted
/// element lists.
pub(crate) fn subsets_of_size(k: usize, size: usize) -> impl Iterator<Item = u64> {
    let mut cur: Option<Vec<usize>> = (size <= k).then(|| (0..size).collect());
    std::iter::from_fn(move || {
        let c = cur.as_mut()?;
        let mask = c.iter().fold(0u64, |m, &b| m | 1 << b);
        // advance to the next combination
        let mut i = size;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < k - size + i {
                c[i] += 1;
                for t in i + 1..size {
                    c[t] = c[t - 1] + 1;
                }
                break;
            }
        }
        Some(mask)
    })
}
