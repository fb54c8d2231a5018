//! Exact checkers and Monte Carlo experiments for the two density properties:
//! s-almost-completeness and (α, β, R)-bounded common neighborhoods.

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bits::BitSet;
use crate::graph::{self, BlockGraph, EdgeOracle, GnpkModel, GraphError, VertexId};
use crate::rng::{derive, stream};
use crate::stats::{self, CsvRow, Tally};

/// Elementary-check budget above which `Auto` mode falls back to sampling.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("exhaustive check needs {needed} elementary checks, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("invalid parameter: {0}")]
    BadParam(String),
}

/// A tuple `(i, j, x_i, y_i, x_j)` together with its number of bad `y_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Tuple {
    pub i: usize,
    pub j: usize,
    pub x_i: usize,
    pub y_i: usize,
    pub x_j: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlmostCompleteReport {
    pub s_star: usize,
    /// Lexicographically least tuple attaining `s_star`; `None` when `k < 2`.
    pub witness: Option<Tuple>,
}

/// Number of `y_j` with `(x_i, y_i)` in block `i` not adjacent to `(x_j, y_j)` in block `j`.
pub fn bad_count<O: EdgeOracle + ?Sized>(g: &O, t: Tuple) -> usize {
    let h = graph::log2(g.n()) / 2;
    let u = VertexId::new(t.i, (t.x_i << h) | t.y_i);
    (0..1usize << h)
        .filter(|&y_j| !g.has_edge(u, VertexId::new(t.j, (t.x_j << h) | y_j)))
        .count()
}

/// Exact minimal `s` for which `g` is s-almost-complete. Both orders of every
/// block pair are examined.
pub fn min_almost_complete(g: &BlockGraph) -> Result<AlmostCompleteReport, DensityError> {
    let h = graph::half_bits(g.n())?;
    let (n, k, side) = (g.n(), g.k(), 1usize << h);
    let best = (0..k * n)
        .into_par_iter()
        .map(|gid| {
            let u = VertexId::from_global(gid, n);
            let row = g.row(u);
            let mut best: Option<(usize, Tuple)> = None;
            for j in (0..k).filter(|&j| j != u.block) {
                for x_j in 0..side {
                    let start = j * n + x_j * side;
                    let bad = side - row.count_range(start, start + side);
                    let t = Tuple {
                        i: u.block,
                        j,
                        x_i: u.index >> h,
                        y_i: u.index & (side - 1),
                        x_j,
                    };
                    if best.is_none_or(|(b, _)| bad > b) {
                        best = Some((bad, t));
                    }
                }
            }
            best
        })
        .reduce(|| None, pick_worst);
    Ok(match best {
        Some((s_star, t)) => AlmostCompleteReport {
            s_star,
            witness: Some(t),
        },
        None => AlmostCompleteReport {
            s_star: 0,
            witness: None,
        },
    })
}

fn pick_worst(a: Option<(usize, Tuple)>, b: Option<(usize, Tuple)>) -> Option<(usize, Tuple)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

pub fn is_almost_complete(g: &BlockGraph, s: usize) -> Result<bool, DensityError> {
    Ok(min_almost_complete(g)?.s_star <= s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CnParams {
    pub alpha: f64,
    pub beta: f64,
    pub r: usize,
}

impl CnParams {
    /// The closed interval `[(1-β)α^s n, (1+β)α^s n]`.
    pub fn interval(&self, size: usize, n: usize) -> (f64, f64) {
        let mid = self.alpha.powi(size as i32) * n as f64;
        ((1.0 - self.beta) * mid, (1.0 + self.beta) * mid)
    }

    pub fn admits(&self, size: usize, n: usize, count: usize) -> bool {
        let (lo, hi) = self.interval(size, n);
        let c = count as f64;
        lo <= c && c <= hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CnMode {
    Exhaustive,
    Sampled { trials: u64, seed: u64 },
    /// Exhaustive when within budget, sampled otherwise.
    Auto { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Coverage {
    Exhaustive { checks: u128 },
    Sampled { trials: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CnCounterexample {
    pub set: Vec<VertexId>,
    pub block: usize,
    pub size: usize,
    pub interval: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedCnReport {
    pub params: CnParams,
    pub pass: bool,
    pub counterexample: Option<CnCounterexample>,
    pub coverage: Coverage,
    /// Largest `| |N(S,i)| / (α^|S| n) - 1 |` over the tested pairs.
    pub max_deviation: f64,
}

/// `Σ_{r≤R} C(kn, r) · k`, saturating.
pub fn exhaustive_cost(n: usize, k: usize, r: usize) -> u128 {
    let total = (n * k) as u128;
    let mut binom: u128 = 1;
    let mut sum: u128 = 0;
    for j in 0..=r as u128 {
        if j > 0 {
            if j > total {
                break;
            }
            binom = binom.saturating_mul(total - j + 1) / j;
        }
        sum = sum.saturating_add(binom.saturating_mul(k as u128));
    }
    sum
}

fn deviation(params: &CnParams, size: usize, n: usize, count: usize) -> f64 {
    let mid = params.alpha.powi(size as i32) * n as f64;
    if mid == 0.0 {
        return if count == 0 { 0.0 } else { f64::INFINITY };
    }
    (count as f64 / mid - 1.0).abs()
}

pub fn check_bounded_cn(
    g: &BlockGraph,
    params: CnParams,
    mode: CnMode,
    budget: u128,
) -> Result<BoundedCnReport, DensityError> {
    if !(params.beta >= 0.0 && params.alpha >= 0.0) {
        return Err(DensityError::BadParam("alpha and beta must be non-negative".into()));
    }
    let cost = exhaustive_cost(g.n(), g.k(), params.r);
    match mode {
        CnMode::Exhaustive if cost > budget => Err(DensityError::BudgetExceeded {
            needed: cost,
            budget,
        }),
        CnMode::Exhaustive => Ok(exhaustive_cn(g, params)),
        CnMode::Auto { .. } if cost <= budget => Ok(exhaustive_cn(g, params)),
        CnMode::Sampled { trials, seed } | CnMode::Auto { trials, seed } => {
            Ok(sampled_cn(g, params, trials, seed))
        }
    }
}

/// Every `S ⊆ V` with `|S| ≤ R` (several vertices per block allowed) and
/// every block outside `B(S)`, in DFS order over increasing global ids.
fn exhaustive_cn(g: &BlockGraph, params: CnParams) -> BoundedCnReport {
    struct Dfs<'a> {
        g: &'a BlockGraph,
        params: CnParams,
        set: Vec<VertexId>,
        checks: u128,
        max_dev: f64,
        fail: Option<CnCounterexample>,
    }

    impl Dfs<'_> {
        fn visit(&mut self, next: usize, acc: &[BitSet]) {
            let (n, k) = (self.g.n(), self.g.k());
            for i in 0..k {
                if self.set.iter().any(|v| v.block == i) {
                    continue;
                }
                self.checks += 1;
                let c = acc[i].count();
                let size = self.set.len();
                self.max_dev = self.max_dev.max(deviation(&self.params, size, n, c));
                if !self.params.admits(size, n, c) {
                    self.fail = Some(CnCounterexample {
                        set: self.set.clone(),
                        block: i,
                        size: c,
                        interval: self.params.interval(size, n),
                    });
                    return;
                }
            }
            if self.set.len() == self.params.r {
                return;
            }
            for gid in next..n * k {
                let v = VertexId::from_global(gid, n);
                let mut child = acc.to_vec();
                for (i, bs) in child.iter_mut().enumerate() {
                    if i != v.block {
                        bs.intersect_with(&self.g.neighbors_in_block(v, i));
                    }
                }
                self.set.push(v);
                self.visit(gid + 1, &child);
                self.set.pop();
                if self.fail.is_some() {
                    return;
                }
            }
        }
    }

    let start: Vec<BitSet> = (0..g.k()).map(|_| BitSet::full(g.n())).collect();
    let mut dfs = Dfs {
        g,
        params,
        set: Vec::new(),
        checks: 0,
        max_dev: 0.0,
        fail: None,
    };
    dfs.visit(0, &start);
    BoundedCnReport {
        params,
        pass: dfs.fail.is_none(),
        counterexample: dfs.fail,
        coverage: Coverage::Exhaustive { checks: dfs.checks },
        max_deviation: dfs.max_dev,
    }
}

/// One sampled query: `S` with at most `per_block` vertices in each block other
/// than the target.
fn sample_query(
    rng: &mut crate::rng::Rng,
    n: usize,
    k: usize,
    max_size: usize,
    per_block: usize,
) -> (Vec<VertexId>, usize) {
    if per_block <= 1 {
        let size = rng.gen_range(1..=max_size.min(k - 1));
        let picked = sample_indices(rng, k, size + 1).into_vec();
        let target = picked[size];
        let mut set: Vec<VertexId> = picked[..size]
            .iter()
            .map(|&b| VertexId::new(b, rng.gen_range(0..n)))
            .collect();
        set.sort();
        return (set, target);
    }
    let target = rng.gen_range(0..k);
    let size = rng.gen_range(1..=max_size.min(per_block * (k - 1)).min(n * (k - 1)));
    let mut set: Vec<VertexId> = Vec::with_capacity(size);
    while set.len() < size {
        let mut b = rng.gen_range(0..k - 1);
        if b >= target {
            b += 1;
        }
        let v = VertexId::new(b, rng.gen_range(0..n));
        if set.contains(&v) || set.iter().filter(|u| u.block == b).count() >= per_block {
            continue;
        }
        set.push(v);
    }
    set.sort();
    (set, target)
}

/// Sampled check: size uniform in `[1, min(R, k-1)]`, then a uniform set of
/// that many blocks, one uniform vertex per block, and a uniform target block
/// among the rest.
fn sampled_cn(g: &BlockGraph, params: CnParams, trials: u64, seed: u64) -> BoundedCnReport {
    if g.k() < 2 || params.r == 0 {
        return BoundedCnReport {
            params,
            pass: true,
            counterexample: None,
            coverage: Coverage::Sampled { trials },
            max_deviation: 0.0,
        };
    }
    let results: Vec<(f64, Option<CnCounterexample>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t);
            let (set, target) = sample_query(&mut rng, g.n(), g.k(), params.r, 1);
            let c = g
                .common_neighborhood(&set, target)
                .expect("target outside B(S)")
                .count();
            let dev = deviation(&params, set.len(), g.n(), c);
            let fail = (!params.admits(set.len(), g.n(), c)).then(|| CnCounterexample {
                interval: params.interval(set.len(), g.n()),
                set,
                block: target,
                size: c,
            });
            (dev, fail)
        })
        .collect();
    let max_deviation = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let counterexample = results.into_iter().find_map(|r| r.1);
    BoundedCnReport {
        params,
        pass: counterexample.is_none(),
        counterexample,
        coverage: Coverage::Sampled { trials },
        max_deviation,
    }
}

/// Empirical β: the largest relative deviation `| |N(S,i)| / (α^|S| n) - 1 |`
/// over sampled queries with `|S| ≤ max_size` and at most `per_block` vertices
/// per block.
pub fn estimate_beta(
    g: &BlockGraph,
    alpha: f64,
    max_size: usize,
    per_block: usize,
    trials: u64,
    seed: u64,
) -> f64 {
    if g.k() < 2 || max_size == 0 {
        return 0.0;
    }
    let params = CnParams {
        alpha,
        beta: 0.0,
        r: max_size,
    };
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t);
            let (set, target) = sample_query(&mut rng, g.n(), g.k(), max_size, per_block);
            let c = g
                .common_neighborhood(&set, target)
                .expect("target outside B(S)")
                .count();
            deviation(&params, set.len(), g.n(), c)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TupleSample {
    pub graph: u64,
    pub tuple: Tuple,
    pub bad: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationResult {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub graphs: u64,
    pub tuples_per_graph: u64,
    pub seed: u64,
    /// `2 sqrt(n) (1 - p)`; a tuple counts when its bad-count is nonzero and at least this.
    pub threshold: f64,
    pub tally: Tally,
    pub reference: f64,
    pub samples: Vec<TupleSample>,
}

impl ConcentrationResult {
    pub fn row(&self) -> CsvRow {
        CsvRow {
            experiment_id: "concentration-ac".into(),
            n: self.n,
            k: self.k,
            p: self.p,
            params: vec![],
            empirical_value: self.tally.freq(),
            reference_bound: self.reference,
            trials: self.tally.trials,
            seed: self.seed,
        }
        .param("graphs", self.graphs)
        .param("tuples_per_graph", self.tuples_per_graph)
        .param("threshold", self.threshold)
        .param("log_base", "e")
        .param("s_whp", stats::almost_complete_threshold(self.n, self.p, self.k))
    }

    pub fn within_reference(&self) -> bool {
        stats::within_upper(self.tally.freq(), self.reference, self.tally.trials)
    }
}

/// Graph `g` of the experiment, as a lazily evaluated model.
pub fn concentration_graph(n: usize, p: f64, k: usize, seed: u64, g: u64) -> Result<GnpkModel, DensityError> {
    Ok(GnpkModel::new(n, p, k, derive(seed, g))?)
}

/// Sample uniform tuples from `graphs` independent `G(n, p, k)` graphs and
/// record the frequency of a nonzero bad-count `≥ 2 sqrt(n)(1-p)`.
pub fn concentration_experiment_ac(
    n: usize,
    p: f64,
    k: usize,
    graphs: u64,
    tuples_per_graph: u64,
    seed: u64,
) -> Result<ConcentrationResult, DensityError> {
    let h = graph::half_bits(n)?;
    if k < 2 {
        return Err(DensityError::BadParam("need at least two blocks".into()));
    }
    let side = 1usize << h;
    let threshold = 2.0 * (n as f64).sqrt() * (1.0 - p);
    let samples: Vec<TupleSample> = (0..graphs)
        .into_par_iter()
        .flat_map_iter(|gi| {
            let model = concentration_graph(n, p, k, seed, gi).expect("validated");
            let tuple_seed = derive(seed ^ 0x7475_706c_6573, gi);
            (0..tuples_per_graph).map(move |t| {
                let mut rng = stream(tuple_seed, t);
                let i = rng.gen_range(0..k);
                let mut j = rng.gen_range(0..k - 1);
                if j >= i {
                    j += 1;
                }
                let tuple = Tuple {
                    i,
                    j,
                    x_i: rng.gen_range(0..side),
                    y_i: rng.gen_range(0..side),
                    x_j: rng.gen_range(0..side),
                };
                TupleSample {
                    graph: gi,
                    tuple,
                    bad: bad_count(&model, tuple),
                }
            })
        })
        .collect();
    let hits = samples
        .iter()
        .filter(|s| s.bad > 0 && s.bad as f64 >= threshold)
        .count() as u64;
    Ok(ConcentrationResult {
        n,
        k,
        p,
        graphs,
        tuples_per_graph,
        seed,
        threshold,
        tally: Tally::new(hits, samples.len() as u64),
        reference: stats::almost_complete_tail(n, p),
        samples,
    })
}
