//! k-partite block graphs and the `G(n, p, k)` sampler.
//!
//! Vertices live in `k` blocks of `n` vertices each (`n` a power of two). A
//! vertex is addressed either by [`VertexId`] (block, index) or by its global id
//! `block * n + index`. Edge membership in sampled graphs is a pure function of
//! `(seed, canonical pair id)`, so a graph can be built in parallel, or queried
//! lazily through [`GnpkModel`] without materializing the adjacency at all.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitSet;
use crate::rng::{hash2, unit_f64};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("block size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("block count must be at least 1")]
    NoBlocks,
    #[error("edge probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("block {block} already contains a vertex of the query set")]
    BlockInQuerySet { block: usize },
    #[error("vertex {0:?} out of range")]
    VertexOutOfRange(VertexId),
    #[error("edge ({0}, {1}) joins two vertices of the same block")]
    IntraBlockEdge(usize, usize),
    #[error("block size {0} has an odd number of bits; the x/y half split needs an even number")]
    OddBitCount(usize),
    #[error("unsupported graph file format {0:?}")]
    BadFormat(String),
    #[error("edge list not sorted or contains duplicates at position {0}")]
    UnsortedEdges(usize),
    #[error("graph file: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

/// A vertex: block in `[0, k)` and index in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId {
    pub block: usize,
    pub index: usize,
}

impl VertexId {
    pub fn new(block: usize, index: usize) -> Self {
        Self { block, index }
    }

    pub fn global(self, n: usize) -> usize {
        self.block * n + self.index
    }

    pub fn from_global(g: usize, n: usize) -> Self {
        Self {
            block: g / n,
            index: g % n,
        }
    }

    /// Binary representation of the index, most significant bit first.
    pub fn bits(self, n: usize) -> Vec<bool> {
        index_bits(self.index, log2(n))
    }

    /// The (x-half, y-half) of the index: the first and last `log(n)/2` bits.
    pub fn halves(self, n: usize) -> Result<(usize, usize)> {
        split_halves(self.index, n)
    }
}

/// MSB-first bits of `index` over `width` positions.
pub fn index_bits(index: usize, width: usize) -> Vec<bool> {
    (0..width).map(|a| (index >> (width - 1 - a)) & 1 == 1).collect()
}

/// Inverse of [`index_bits`].
pub fn index_from_bits(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Split an index into its (x, y) halves; x is the high half.
pub fn split_halves(index: usize, n: usize) -> Result<(usize, usize)> {
    let h = half_bits(n)?;
    Ok((index >> h, index & ((1 << h) - 1)))
}

pub fn join_halves(x: usize, y: usize, n: usize) -> Result<usize> {
    let h = half_bits(n)?;
    Ok((x << h) | y)
}

/// `log(n)/2`, rejecting odd bit counts.
pub fn half_bits(n: usize) -> Result<usize> {
    check_power_of_two(n)?;
    let b = log2(n);
    if !b.is_multiple_of(2) {
        return Err(GraphError::OddBitCount(n));
    }
    Ok(b / 2)
}

pub fn log2(n: usize) -> usize {
    debug_assert!(n.is_power_of_two());
    n.trailing_zeros() as usize
}

pub fn check_power_of_two(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(GraphError::NotPowerOfTwo(n));
    }
    Ok(())
}

fn check_params(n: usize, p: f64, k: usize) -> Result<()> {
    check_power_of_two(n)?;
    if k < 1 {
        return Err(GraphError::NoBlocks);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::BadProbability(p));
    }
    Ok(())
}

/// Whether the cross-block pair of global ids `(a, b)` is an edge of `G(n, p, k)`
/// under `seed`. Symmetric in `a` and `b`.
#[inline]
pub fn sampled_edge(seed: u64, p: f64, a: usize, b: usize) -> bool {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let pair = ((lo as u64) << 32) | hi as u64;
    unit_f64(hash2(seed, pair)) < p
}

/// Read access to a block graph's edges.
pub trait EdgeOracle: Sync {
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn has_edge(&self, u: VertexId, v: VertexId) -> bool;
}

/// `G(n, p, k)` evaluated lazily, edge by edge. Agrees with [`BlockGraph::sample`]
/// for the same parameters.
#[derive(Debug, Clone, Copy)]
pub struct GnpkModel {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub seed: u64,
}

impl GnpkModel {
    pub fn new(n: usize, p: f64, k: usize, seed: u64) -> Result<Self> {
        check_params(n, p, k)?;
        Ok(Self { n, k, p, seed })
    }
}

impl EdgeOracle for GnpkModel {
    fn n(&self) -> usize {
        self.n
    }

    fn k(&self) -> usize {
        self.k
    }

    fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        u.block != v.block && sampled_edge(self.seed, self.p, u.global(self.n), v.global(self.n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub p: f64,
    pub seed: u64,
}

/// A k-partite graph with `n` vertices per block and bitset adjacency rows.
#[derive(Clone, PartialEq)]
pub struct BlockGraph {
    n: usize,
    k: usize,
    /// Row per global vertex, over all `k * n` global ids; same-block bits stay zero.
    adj: Vec<BitSet>,
    meta: Option<GraphMeta>,
}

impl std::fmt::Debug for BlockGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlockGraph")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("edges", &self.edge_count())
            .field("meta", &self.meta)
            .finish()
    }
}

impl BlockGraph {
    /// The edgeless graph.
    pub fn empty(n: usize, k: usize) -> Result<Self> {
        check_params(n, 0.0, k)?;
        let total = n * k;
        Ok(Self {
            n,
            k,
            adj: vec![BitSet::new(total); total],
            meta: None,
        })
    }

    /// The complete k-partite graph.
    pub fn complete(n: usize, k: usize) -> Result<Self> {
        let mut g = Self::empty(n, k)?;
        for u in 0..n * k {
            let bu = u / n;
            let row = &mut g.adj[u];
            for v in 0..n * k {
                if v / n != bu {
                    row.insert(v);
                }
            }
        }
        Ok(g)
    }

    /// Sample from `G(n, p, k)`. Each cross-block pair is present independently
    /// with probability `p`, as a pure function of `(seed, pair)`.
    pub fn sample(n: usize, p: f64, k: usize, seed: u64) -> Result<Self> {
        check_params(n, p, k)?;
        let total = n * k;
        let adj: Vec<BitSet> = (0..total)
            .into_par_iter()
            .map(|u| {
                let mut row = BitSet::new(total);
                let bu = u / n;
                for v in 0..total {
                    if v / n != bu && sampled_edge(seed, p, u, v) {
                        row.insert(v);
                    }
                }
                row
            })
            .collect();
        Ok(Self {
            n,
            k,
            adj,
            meta: Some(GraphMeta { p, seed }),
        })
    }

    pub fn from_edges(
        n: usize,
        k: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let mut g = Self::empty(n, k)?;
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn log_n(&self) -> usize {
        log2(self.n)
    }

    pub fn meta(&self) -> Option<GraphMeta> {
        self.meta
    }

    pub fn num_vertices(&self) -> usize {
        self.n * self.k
    }

    fn check_vertex(&self, u: VertexId) -> Result<()> {
        if u.block >= self.k || u.index >= self.n {
            return Err(GraphError::VertexOutOfRange(u));
        }
        Ok(())
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        self.set_edge(u, v, true)
    }

    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        self.set_edge(u, v, false)
    }

    fn set_edge(&mut self, u: VertexId, v: VertexId, present: bool) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let (a, b) = (u.global(self.n), v.global(self.n));
        if u.block == v.block {
            return Err(GraphError::IntraBlockEdge(a, b));
        }
        self.adj[a].set(b, present);
        self.adj[b].set(a, present);
        self.meta = None;
        Ok(())
    }

    #[inline]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj[u.global(self.n)].contains(v.global(self.n))
    }

    #[inline]
    pub fn has_edge_global(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(b)
    }

    /// Adjacency row of a vertex over global ids.
    pub fn row(&self, u: VertexId) -> &BitSet {
        &self.adj[u.global(self.n)]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BitSet::count).sum::<usize>() / 2
    }

    /// Number of cross-block vertex pairs, `C(k, 2) * n^2`.
    pub fn cross_pair_count(&self) -> usize {
        self.k * (self.k - 1) / 2 * self.n * self.n
    }

    /// Sorted cross-block edges as global-id pairs `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (a, row) in self.adj.iter().enumerate() {
            out.extend(row.iter().filter(|&b| b > a).map(|b| (a, b)));
        }
        out
    }

    /// Neighbors of `u` inside block `i`, as a bitset over `[0, n)`.
    pub fn neighbors_in_block(&self, u: VertexId, i: usize) -> BitSet {
        let row = self.row(u);
        let start = i * self.n;
        if self.n.is_multiple_of(64) {
            return BitSet::from_words(self.n, &row.words()[start / 64..]);
        }
        let mut out = BitSet::new(self.n);
        for idx in 0..self.n {
            if row.contains(start + idx) {
                out.insert(idx);
            }
        }
        out
    }

    /// `N^∩(U, i)`: vertices of block `i` adjacent to every vertex of `U`.
    /// Errors if some vertex of `U` lies in block `i`.
    pub fn common_neighborhood(&self, set: &[VertexId], i: usize) -> Result<BitSet> {
        if i >= self.k {
            return Err(GraphError::VertexOutOfRange(VertexId::new(i, 0)));
        }
        let mut acc = BitSet::full(self.n);
        for &u in set {
            self.check_vertex(u)?;
            if u.block == i {
                return Err(GraphError::BlockInQuerySet { block: i });
            }
            acc.intersect_with(&self.neighbors_in_block(u, i));
            if acc.is_empty() {
                break;
            }
        }
        Ok(acc)
    }

    /// Whether the given vertices are pairwise adjacent (vertices sharing a block
    /// count as non-adjacent).
    pub fn is_clique(&self, vs: &[VertexId]) -> bool {
        vs.iter().enumerate().all(|(a, &u)| {
            vs[a + 1..]
                .iter()
                .all(|&v| u.block != v.block && self.has_edge(u, v))
        })
    }

    /// The block graph on a subset of blocks, renumbered in the given order.
    pub fn induced_blocks(&self, blocks: &[usize]) -> Result<BlockGraph> {
        let mut g = BlockGraph::empty(self.n, blocks.len().max(1))?;
        for (bi, &i) in blocks.iter().enumerate() {
            for (bj, &j) in blocks.iter().enumerate().skip(bi + 1) {
                for a in 0..self.n {
                    for b in 0..self.n {
                        if self.has_edge(VertexId::new(i, a), VertexId::new(j, b)) {
                            g.add_edge(VertexId::new(bi, a), VertexId::new(bj, b))?;
                        }
                    }
                }
            }
        }
        Ok(g)
    }

    /// Check structural invariants: symmetry and cross-block-only edges.
    pub fn validate(&self) -> Result<()> {
        check_power_of_two(self.n)?;
        for (a, row) in self.adj.iter().enumerate() {
            for b in row.iter() {
                if a / self.n == b / self.n {
                    return Err(GraphError::IntraBlockEdge(a, b));
                }
                if !self.adj[b].contains(a) {
                    return Err(GraphError::BadFormat(format!("asymmetric pair ({a}, {b})")));
                }
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            format: GRAPH_FORMAT.to_string(),
            n: self.n,
            k: self.k,
            p: self.meta.map(|m| m.p),
            seed: self.meta.map(|m| m.seed),
            edges: self.edges().into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("graph serializes")
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        if file.format != GRAPH_FORMAT {
            return Err(GraphError::BadFormat(file.format.clone()));
        }
        let mut g = BlockGraph::empty(file.n, file.k)?;
        let total = file.n * file.k;
        let mut prev: Option<[usize; 2]> = None;
        for (pos, &[a, b]) in file.edges.iter().enumerate() {
            if a >= b || b >= total {
                return Err(GraphError::UnsortedEdges(pos));
            }
            if prev.is_some_and(|p| p >= [a, b]) {
                return Err(GraphError::UnsortedEdges(pos));
            }
            prev = Some([a, b]);
            g.add_edge(
                VertexId::from_global(a, file.n),
                VertexId::from_global(b, file.n),
            )?;
        }
        g.meta = match (file.p, file.seed) {
            (Some(p), Some(seed)) => Some(GraphMeta { p, seed }),
            _ => None,
        };
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }
}

impl EdgeOracle for BlockGraph {
    fn n(&self) -> usize {
        self.n
    }

    fn k(&self) -> usize {
        self.k
    }

    fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        BlockGraph::has_edge(self, u, v)
    }
}

/// A plain undirected graph on `n` vertices, the input of the binary encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<BitSet>,
}

impl SimpleGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![BitSet::new(n); n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    g.adj[u].insert(v);
                }
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert_ne!(u, v, "self-loop");
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    /// Some `k`-clique, as sorted vertices, by exhaustive search.
    pub fn find_clique(&self, k: usize) -> Option<Vec<usize>> {
        fn extend(g: &SimpleGraph, k: usize, cur: &mut Vec<usize>, cand: &BitSet) -> bool {
            if cur.len() == k {
                return true;
            }
            for v in cand.iter() {
                let mut next = cand.clone();
                next.intersect_with(&g.adj[v]);
                for w in 0..=v {
                    if next.contains(w) {
                        next.remove(w);
                    }
                }
                cur.push(v);
                if extend(g, k, cur, &next) {
                    return true;
                }
                cur.pop();
            }
            false
        }
        let mut cur = Vec::new();
        extend(self, k, &mut cur, &BitSet::full(self.len())).then_some(cur)
    }
}

impl BlockGraph {
    /// The same graph on global ids, forgetting the block structure.
    pub fn flatten(&self) -> SimpleGraph {
        SimpleGraph {
            adj: self.adj.clone(),
        }
    }

    /// Some transversal clique (one vertex per block), by exhaustive search.
    pub fn find_transversal_clique(&self) -> Option<Vec<VertexId>> {
        fn extend(g: &BlockGraph, cur: &mut Vec<VertexId>) -> bool {
            let b = cur.len();
            if b == g.k {
                return true;
            }
            for idx in 0..g.n {
                let v = VertexId::new(b, idx);
                if cur.iter().all(|&u| g.has_edge(u, v)) {
                    cur.push(v);
                    if extend(g, cur) {
                        return true;
                    }
                    cur.pop();
                }
            }
            false
        }
        let mut cur = Vec::new();
        extend(self, &mut cur).then_some(cur)
    }
}

pub const GRAPH_FORMAT: &str = "BCLQ-1";

/// On-disk graph: header plus sorted cross-block edge list of global ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub format: String,
    pub n: usize,
    pub k: usize,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub edges: Vec<[usize; 2]>,
}
