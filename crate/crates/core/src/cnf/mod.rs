//! Binary and block CNF encodings of the k-clique formula.
//!
//! Variable `x_{i,a}` is bit `a` (0 = most significant) of the vertex picked by
//! column `i`. It is numbered `i * bits + a + 1`, both indices 0-based. The
//! literal `(x_{i,a} != b)` is `x_{i,a}` when `b = 0` and `¬x_{i,a}` when `b = 1`.

pub mod dimacs;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{self, BlockGraph, GraphMeta, SimpleGraph, VertexId};

/// A DIMACS literal: `+v` or `-v` for variable `v ≥ 1`.
pub type Lit = i32;

#[derive(Debug, Error, PartialEq)]
pub enum CnfError {
    #[error("vertex count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("restriction needs a binary encoding whose vertex set splits into {k} aligned blocks: {reason}")]
    NotBlockAligned { k: usize, reason: String },
    #[error("malformed DIMACS at line {line}: {reason}")]
    Dimacs { line: usize, reason: String },
    #[error("assignment has {got} variables, formula has {want}")]
    AssignmentSize { got: usize, want: usize },
}

/// `(column, bit) <-> variable` numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarMap {
    pub columns: usize,
    pub bits: usize,
}

impl VarMap {
    pub fn num_vars(&self) -> usize {
        self.columns * self.bits
    }

    pub fn var(&self, column: usize, bit: usize) -> u32 {
        debug_assert!(column < self.columns && bit < self.bits);
        (column * self.bits + bit + 1) as u32
    }

    /// Inverse of [`VarMap::var`].
    pub fn column_bit(&self, var: u32) -> (usize, usize) {
        let z = var as usize - 1;
        (z / self.bits, z % self.bits)
    }

    /// The literal `(x_{column,bit} != value)`.
    pub fn neq(&self, column: usize, bit: usize, value: bool) -> Lit {
        let v = self.var(column, bit) as Lit;
        if value {
            -v
        } else {
            v
        }
    }

    /// Literals saying "column does not pick `index`".
    pub fn not_vertex(&self, column: usize, index: usize) -> impl Iterator<Item = Lit> + '_ {
        graph::index_bits(index, self.bits)
            .into_iter()
            .enumerate()
            .map(move |(a, b)| self.neq(column, a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClauseTag {
    /// Binary encoding: columns `i` and `j` may not pick non-adjacent `u`, `v`.
    Edge { i: usize, j: usize, u: usize, v: usize },
    /// Binary encoding: columns `i < j` may not both pick `v`.
    Functionality { v: usize, i: usize, j: usize },
    /// Block encoding: the cross-block non-edge `(u, v)` with `u.block < v.block`.
    BlockEdge { u: VertexId, v: VertexId },
    /// Clause of unknown provenance, e.g. read from DIMACS.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Encoding {
    Binary,
    Block,
    Other,
}

impl Encoding {
    pub fn name(self) -> &'static str {
        match self {
            Encoding::Binary => "binary",
            Encoding::Block => "block",
            Encoding::Other => "other",
        }
    }
}

/// Where a formula came from; recorded in DIMACS comments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormulaMeta {
    pub encoding: Encoding,
    /// Vertices per block (block encoding) or in total (binary encoding).
    pub n: usize,
    pub k: usize,
    pub p: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
    pub var_map: VarMap,
    pub tags: Vec<ClauseTag>,
    pub meta: FormulaMeta,
}

/// A total assignment, one bit per variable (index `var - 1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(pub Vec<bool>);

impl Assignment {
    /// Assignment whose column `i` picks `picks[i]`.
    pub fn from_columns(map: &VarMap, picks: &[usize]) -> Self {
        let mut bits = vec![false; map.num_vars()];
        for (i, &idx) in picks.iter().enumerate() {
            for (a, b) in graph::index_bits(idx, map.bits).into_iter().enumerate() {
                bits[map.var(i, a) as usize - 1] = b;
            }
        }
        Assignment(bits)
    }

    /// The `num_vars` low bits of `word`, variable 1 first.
    pub fn from_word(num_vars: usize, word: u64) -> Self {
        Assignment((0..num_vars).map(|v| (word >> v) & 1 == 1).collect())
    }

    pub fn column(&self, map: &VarMap, i: usize) -> usize {
        let bits: Vec<bool> = (0..map.bits)
            .map(|a| self.0[map.var(i, a) as usize - 1])
            .collect();
        graph::index_from_bits(&bits)
    }

    pub fn columns(&self, map: &VarMap) -> Vec<usize> {
        (0..map.columns).map(|i| self.column(map, i)).collect()
    }

    #[inline]
    pub fn lit(&self, l: Lit) -> bool {
        self.0[l.unsigned_abs() as usize - 1] == (l > 0)
    }
}

impl CnfFormula {
    /// A formula without graph provenance; every variable is its own column.
    pub fn plain(num_vars: usize, clauses: Vec<Vec<Lit>>) -> Self {
        let tags = vec![ClauseTag::Plain; clauses.len()];
        Self {
            num_vars,
            clauses,
            var_map: VarMap {
                columns: num_vars,
                bits: 1,
            },
            tags,
            meta: FormulaMeta {
                encoding: Encoding::Other,
                n: 0,
                k: 0,
                p: None,
                seed: None,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clause_satisfied(&self, c: usize, a: &Assignment) -> bool {
        self.clauses[c].iter().any(|&l| a.lit(l))
    }

    pub fn satisfies(&self, a: &Assignment) -> bool {
        (0..self.clauses.len()).all(|c| self.clause_satisfied(c, a))
    }

    /// Satisfying assignment by enumeration of all `2^num_vars` points.
    pub fn brute_force_sat(&self) -> Option<Assignment> {
        assert!(self.num_vars <= 30, "too many variables for enumeration");
        (0..1u64 << self.num_vars)
            .map(|w| Assignment::from_word(self.num_vars, w))
            .find(|a| self.satisfies(a))
    }
}

/// Least-index falsified clause, or `None` if `a` satisfies `f`.
pub fn search_falsified(f: &CnfFormula, a: &Assignment) -> Result<Option<usize>, CnfError> {
    if a.0.len() != f.num_vars {
        return Err(CnfError::AssignmentSize {
            got: a.0.len(),
            want: f.num_vars,
        });
    }
    Ok((0..f.clauses.len()).find(|&c| !f.clause_satisfied(c, a)))
}

/// Binary encoding over `g`'s vertex set with `k` columns. Edge axioms come
/// first, ordered by `(i, j, u, v)`, then functionality axioms by `(v, i, j)`.
pub fn encode_bin_clique(g: &SimpleGraph, k: usize) -> Result<CnfFormula, CnfError> {
    let n = g.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(CnfError::NotPowerOfTwo(n));
    }
    let map = VarMap {
        columns: k,
        bits: graph::log2(n),
    };
    let mut clauses = Vec::new();
    let mut tags = Vec::new();
    for i in 0..k {
        for j in (0..k).filter(|&j| j != i) {
            for u in 0..n {
                for v in u + 1..n {
                    if g.has_edge(u, v) {
                        continue;
                    }
                    clauses.push(map.not_vertex(i, u).chain(map.not_vertex(j, v)).collect());
                    tags.push(ClauseTag::Edge { i, j, u, v });
                }
            }
        }
    }
    for v in 0..n {
        for i in 0..k {
            for j in i + 1..k {
                clauses.push(map.not_vertex(i, v).chain(map.not_vertex(j, v)).collect());
                tags.push(ClauseTag::Functionality { v, i, j });
            }
        }
    }
    Ok(CnfFormula {
        num_vars: map.num_vars(),
        clauses,
        var_map: map,
        tags,
        meta: FormulaMeta {
            encoding: Encoding::Binary,
            n,
            k,
            p: None,
            seed: None,
        },
    })
}

/// Block encoding: one clause per cross-block non-edge `(u, v)`,
/// `u.block < v.block`, ordered by `(i, j, u, v)`.
pub fn encode_block_clique(g: &BlockGraph) -> CnfFormula {
    let (n, k) = (g.n(), g.k());
    let map = VarMap {
        columns: k,
        bits: g.log_n(),
    };
    let mut clauses = Vec::new();
    let mut tags = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            for a in 0..n {
                for b in 0..n {
                    let (u, v) = (VertexId::new(i, a), VertexId::new(j, b));
                    if g.has_edge(u, v) {
                        continue;
                    }
                    clauses.push(map.not_vertex(i, a).chain(map.not_vertex(j, b)).collect());
                    tags.push(ClauseTag::BlockEdge { u, v });
                }
            }
        }
    }
    let meta = g.meta();
    CnfFormula {
        num_vars: map.num_vars(),
        clauses,
        var_map: map,
        tags,
        meta: FormulaMeta {
            encoding: Encoding::Block,
            n,
            k,
            p: meta.map(|m: GraphMeta| m.p),
            seed: meta.map(|m| m.seed),
        },
    }
}

/// Restrict a binary encoding over `N = n k` vertices to the block encoding:
/// the top `log k` bits of column `i` are fixed to `i`, satisfied clauses are
/// dropped, false literals removed and the remaining variables renumbered.
/// Output clauses are ordered like [`encode_block_clique`].
pub fn block_restriction(f: &CnfFormula) -> Result<CnfFormula, CnfError> {
    let k = f.var_map.columns;
    let big_n = f.meta.n;
    let fail = |reason: &str| CnfError::NotBlockAligned {
        k,
        reason: reason.to_string(),
    };
    if f.meta.encoding != Encoding::Binary {
        return Err(fail("input is not a binary encoding"));
    }
    if k == 0 || !k.is_power_of_two() || k > big_n || big_n != 1 << f.var_map.bits {
        return Err(fail("k must be a power of two dividing N"));
    }
    let top = graph::log2(k);
    let low = f.var_map.bits - top;
    let n = big_n / k;
    let out_map = VarMap {
        columns: k,
        bits: low,
    };
    // Value forced on a variable, if it is one of the fixed high bits.
    let fixed = |var: u32| -> Option<bool> {
        let (i, a) = f.var_map.column_bit(var);
        (a < top).then(|| (i >> (top - 1 - a)) & 1 == 1)
    };
    let mut kept: Vec<(ClauseTag, Vec<Lit>)> = Vec::new();
    for (clause, tag) in f.clauses.iter().zip(&f.tags) {
        let mut lits = Vec::new();
        let mut satisfied = false;
        for &l in clause {
            let var = l.unsigned_abs();
            match fixed(var) {
                Some(val) if val == (l > 0) => {
                    satisfied = true;
                    break;
                }
                Some(_) => {}
                None => {
                    let (i, a) = f.var_map.column_bit(var);
                    let nv = out_map.var(i, a - top) as Lit;
                    lits.push(if l > 0 { nv } else { -nv });
                }
            }
        }
        if satisfied {
            continue;
        }
        let tag = match *tag {
            ClauseTag::Edge { i, j, u, v } => {
                let (u, v) = (VertexId::from_global(u, n), VertexId::from_global(v, n));
                debug_assert_eq!((u.block, v.block), (i, j));
                if i < j {
                    ClauseTag::BlockEdge { u, v }
                } else {
                    ClauseTag::BlockEdge { u: v, v: u }
                }
            }
            other => other,
        };
        kept.push((tag, lits));
    }
    kept.sort_by_key(|(tag, _)| match *tag {
        ClauseTag::BlockEdge { u, v } => (u.block, v.block, u.index, v.index),
        _ => (usize::MAX, 0, 0, 0),
    });
    let (tags, clauses) = kept.into_iter().unzip();
    Ok(CnfFormula {
        num_vars: out_map.num_vars(),
        clauses,
        var_map: out_map,
        tags,
        meta: FormulaMeta {
            encoding: Encoding::Block,
            n,
            k,
            p: f.meta.p,
            seed: f.meta.seed,
        },
    })
}
