//! Brute-force oracles shared by the integration tests. None of them calls
//! the library routine it is compared against.
#![allow(dead_code)]

use std::collections::HashMap;

use bclique::bits::BitSet;
use bclique::bottleneck::{Domain, TriangleDag};
use bclique::cnf::{CnfFormula, Lit};
use bclique::f2::{Equation, Layout, LinearForm};
use bclique::graph::{BlockGraph, EdgeOracle, VertexId};
use bclique::proof::{AffineDag, AffineEdge, VarSplit};

/// Rank over GF(2) of forms given as bit masks.
pub fn rank(rows: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

pub fn mask(f: &LinearForm) -> u64 {
    f.vars().fold(0, |m, v| m | 1 << v)
}

pub fn block_mask(l: &Layout, blocks: u32) -> u64 {
    (0..l.k)
        .filter(|b| (blocks >> b) & 1 == 1)
        .flat_map(|b| l.block_vars(b))
        .fold(0, |m, v| m | 1 << v)
}

/// No block set `T` carries more than `|T|` dimensions of the span:
/// `rank(F) - rank(F with T zeroed) <= |T|` for every `T`.
pub fn safe_by_definition(l: &Layout, forms: &[u64]) -> bool {
    let r = rank(forms);
    (0..1u32 << l.k).all(|t| {
        let keep = !block_mask(l, t);
        let zeroed: Vec<u64> = forms.iter().map(|f| f & keep).collect();
        r - rank(&zeroed) <= t.count_ones() as usize
    })
}

/// The inclusion-minimal block sets whose zeroing makes the forms safe.
pub fn minimal_safe_zeroings(l: &Layout, forms: &[u64]) -> Vec<u32> {
    let ok: Vec<u32> = (0..1u32 << l.k)
        .filter(|&s| {
            let keep = !block_mask(l, s);
            safe_by_definition(l, &forms.iter().map(|f| f & keep).collect::<Vec<_>>())
        })
        .collect();
    ok.iter().copied().filter(|&w| !ok.iter().any(|&o| o != w && o & w == o)).collect()
}

/// Exact probability that `x`, with `x_i` uniform on `allowed[i]`, satisfies
/// the equations, by Fourier expansion over the span of the rows.
pub fn exact_satisfaction(l: &Layout, eqs: &[Equation], allowed: &[BitSet]) -> f64 {
    let rows: Vec<(u64, bool)> = eqs.iter().map(|e| (mask(&e.form), e.rhs)).collect();
    if rows.len() > 20 {
        panic!("too many equations for the oracle");
    }
    let m = rows.len();
    let mut total = 0.0;
    for c in 0u32..1 << m {
        let (mut a, mut rhs) = (0u64, false);
        for (j, &(f, b)) in rows.iter().enumerate() {
            if (c >> j) & 1 == 1 {
                a ^= f;
                rhs ^= b;
            }
        }
        // E[(-1)^{a·x}] factors over blocks
        let mut e = if rhs { -1.0 } else { 1.0 };
        for (i, set) in allowed.iter().enumerate() {
            let coef: usize = l
                .block_vars(i)
                .enumerate()
                .filter(|&(_, v)| (a >> v) & 1 == 1)
                .fold(0, |acc, (bit, _)| acc | 1 << (l.bits - 1 - bit));
            let s: f64 = set
                .iter()
                .map(|x| if (x & coef).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 })
                .sum();
            e *= s / set.count() as f64;
        }
        total += e;
    }
    total / (1u64 << m) as f64
}

/// Transversal cliques of `g`, by enumerating one vertex per block.
pub fn transversal_cliques(g: &BlockGraph) -> usize {
    let (n, k) = (g.n(), g.k());
    let mut count = 0;
    let mut pick = vec![0usize; k];
    loop {
        let vs: Vec<VertexId> = pick.iter().enumerate().map(|(b, &i)| VertexId::new(b, i)).collect();
        if (0..k).all(|a| (a + 1..k).all(|b| g.has_edge(vs[a], vs[b]))) {
            count += 1;
        }
        let mut c = 0;
        while c < k {
            pick[c] += 1;
            if pick[c] < n {
                break;
            }
            pick[c] = 0;
            c += 1;
        }
        if c == k {
            return count;
        }
    }
}

/// `(x << h) | y`.
pub fn vertex_index(x: usize, y: usize, n: usize) -> usize {
    let h = n.trailing_zeros() as usize / 2;
    (x << h) | y
}

/// `y_j` values giving a non-edge for the tuple.
pub fn bad_count<O: EdgeOracle>(g: &O, i: usize, j: usize, x_i: usize, y_i: usize, x_j: usize) -> usize {
    let n = g.n();
    let side = 1usize << (n.trailing_zeros() / 2);
    let u = VertexId::new(i, vertex_index(x_i, y_i, n));
    (0..side)
        .filter(|&y_j| !g.has_edge(u, VertexId::new(j, vertex_index(x_j, y_j, n))))
        .count()
}

/// `|N(S) ∩ V_i|` by scanning block `i`.
pub fn common_neighbors(g: &BlockGraph, set: &[VertexId], i: usize) -> usize {
    (0..g.n())
        .filter(|&v| set.iter().all(|&u| g.has_edge(u, VertexId::new(i, v))))
        .count()
}

/// Block width of `z` for `slice`, straight from the graph: the least `|W|`
/// such that every point of the slice, completed by `z`, selects a
/// non-adjacent pair inside `W`. `z` is an `x` when `z_is_x`, else a `y`.
/// `None` when no block set works.
pub fn brute_block_width(g: &BlockGraph, dom: &Domain, z_is_x: bool, z: usize, slice: &BitSet) -> Option<usize> {
    let k = dom.k;
    let others: Vec<usize> = slice.iter().collect();
    if others.is_empty() {
        return Some(0);
    }
    let pairs: Vec<Vec<(usize, usize)>> = others
        .iter()
        .map(|&o| {
            let (x, y) = if z_is_x { (z, o) } else { (o, z) };
            let mut out = Vec::new();
            for a in 0..k {
                for b in a + 1..k {
                    if !g.has_edge(dom.vertex(x, y, a), dom.vertex(x, y, b)) {
                        out.push((a, b));
                    }
                }
            }
            out
        })
        .collect();
    (0u32..1 << k)
        .filter(|&w| pairs.iter().all(|ps| ps.iter().any(|&(a, b)| (w >> a) & 1 == 1 && (w >> b) & 1 == 1)))
        .map(|w| w.count_ones() as usize)
        .min()
}

/// Free coordinates of `set` and the least `H_∞(z_J) - γ|J|` over nonempty
/// sets `J` of them (`0` with none free), marginals counted one `J` at a time.
pub fn min_entropy_margin(set: &BitSet, m: usize, gamma: f64) -> (Vec<usize>, f64) {
    let pts: Vec<usize> = set.iter().collect();
    let free: Vec<usize> = (0..m)
        .filter(|&c| {
            let first = (pts[0] >> c) & 1;
            pts.iter().any(|&z| (z >> c) & 1 != first)
        })
        .collect();
    let mut worst = 0f64;
    for sub in 1u32..1 << free.len() {
        let coords: Vec<usize> = (0..free.len()).filter(|j| (sub >> j) & 1 == 1).map(|j| free[j]).collect();
        let mut hist: HashMap<usize, usize> = HashMap::new();
        for &z in &pts {
            let key = coords.iter().enumerate().fold(0, |acc, (t, &c)| acc | ((z >> c) & 1) << t);
            *hist.entry(key).or_default() += 1;
        }
        let max = *hist.values().max().unwrap() as f64;
        let margin = -(max / pts.len() as f64).log2() - gamma * coords.len() as f64;
        worst = if sub == 1 { margin } else { worst.min(margin) };
    }
    (free, worst)
}

/// Fraction of `{0,1}^dims` satisfying the equations: `2^{-rank}`, or `0`
/// when inconsistent. Forms are shifted up one bit; bit 0 holds the right-hand side.
pub fn affine_fraction(eqs: &[Equation]) -> f64 {
    let mut basis: Vec<u64> = Vec::new();
    for e in eqs {
        let mut v = mask(&e.form) << 1 | e.rhs as u64;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v == 1 {
            return 0.0;
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    0.5f64.powi(basis.len() as i32)
}

pub fn parity(m: u64, p: u64) -> bool {
    (m & p).count_ones() % 2 == 1
}

pub fn clause_falsified(clause: &[Lit], p: u64) -> bool {
    clause.iter().all(|&l| ((p >> (l.unsigned_abs() - 1)) & 1 == 1) != (l > 0))
}

/// Shape-DAG conditions of a triangle-DAG, enumerating every `(x, y)`.
pub fn triangle_dag_ok(f: &CnfFormula, dag: &TriangleDag, split: &VarSplit) -> bool {
    let (nx, ny) = (1usize << split.x.len(), 1usize << split.y.len());
    let point = |x: usize, y: usize| {
        let mut p = 0u64;
        for (t, &v) in split.x.iter().enumerate() {
            p |= (((x >> t) & 1) as u64) << v;
        }
        for (t, &v) in split.y.iter().enumerate() {
            p |= (((y >> t) & 1) as u64) << v;
        }
        p
    };
    let inside = |v: usize, x: usize, y: usize| dag.nodes[v].tri.a[x] <= dag.nodes[v].tri.b[y];
    (0..nx).all(|x| {
        (0..ny).all(|y| {
            inside(dag.root, x, y)
                && (0..dag.len()).filter(|&v| inside(v, x, y)).all(|v| {
                    let node = &dag.nodes[v];
                    if node.children.is_empty() {
                        node.output
                            .and_then(|o| f.clauses.get(o))
                            .is_some_and(|c| clause_falsified(c, point(x, y)))
                    } else {
                        node.children.iter().any(|&c| inside(c, x, y))
                    }
                })
        })
    })
}

/// Shape-DAG conditions of an affine DAG, enumerating `{0,1}^n`.
pub fn affine_dag_ok(f: &CnfFormula, dag: &AffineDag) -> bool {
    let n = dag.num_vars;
    let sat = |v: usize, p: u64| {
        dag.nodes[v]
            .system
            .equations()
            .iter()
            .all(|e| parity(mask(&e.form), p) == e.rhs)
    };
    (0..1u64 << n).all(|p| {
        sat(dag.root, p)
            && (0..dag.len()).filter(|&v| sat(v, p)).all(|v| match &dag.nodes[v].edge {
                AffineEdge::Leaf { output } => output
                    .and_then(|o| f.clauses.get(o))
                    .is_some_and(|c| clause_falsified(c, p)),
                AffineEdge::Branch { query, children } => sat(children[parity(mask(query), p) as usize], p),
                AffineEdge::Unary { child } => sat(*child, p),
            })
    })
}

/// Non-edge frequency between the vertices selected in blocks `a`, `b` over
/// the rectangle `xs × ys`.
pub fn pair_nonedge(g: &BlockGraph, dom: &Domain, xs: &BitSet, ys: &BitSet, a: usize, b: usize) -> f64 {
    let mut non = 0usize;
    for x in xs.iter() {
        for y in ys.iter() {
            non += usize::from(!g.has_edge(dom.vertex(x, y, a), dom.vertex(x, y, b)));
        }
    }
    non as f64 / (xs.count() * ys.count()) as f64
}

/// Total variation distance between two distributions on the same support.
pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
