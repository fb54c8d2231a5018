use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::tree::ParityDecisionTree;
use super::walk::simulate_walk;
use super::{NonEdgeInstance, PdtError};
use crate::rng::{derive, stream};
use crate::stats::{self, Tally};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionReport {
    pub trials: u64,
    /// Per node: walks that visited it.
    pub walk_visits: Vec<u64>,
    /// Per node: direct runs on product inputs that visited it.
    pub direct_visits: Vec<u64>,
    /// Total variation distance between the two leaf distributions.
    pub leaf_tv: f64,
    /// Largest per-node gap in visit frequency.
    pub max_node_gap: f64,
}

fn add(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Node-visit frequencies of the walk against direct runs of `tree` on `x`
/// with each free `x_i` uniform in `N^∩(M, i)`.
pub fn walk_distribution_test(
    inst: &NonEdgeInstance,
    tree: &ParityDecisionTree,
    trials: u64,
    seed: u64,
) -> Result<DistributionReport, PdtError> {
    let size = tree.len();
    let layout = inst.layout();
    let free: Vec<usize> = inst.free_blocks().iter().collect();
    if let Some(&i) = free.iter().find(|&&i| inst.neighborhood_list(i).is_empty()) {
        return Err(PdtError::EmptyNeighborhood(i));
    }
    let walk_seed = derive(seed, 0);
    let walk_visits = (0..trials)
        .into_par_iter()
        .try_fold(
            || vec![0u64; size],
            |mut acc, t| {
                let w = simulate_walk(inst, tree, &mut stream(walk_seed, t))?;
                for v in w.path {
                    acc[v] += 1;
                }
                Ok::<_, PdtError>(acc)
            },
        )
        .try_reduce(|| vec![0u64; size], |a, b| Ok(add(a, b)))?;
    let direct_seed = derive(seed, 1);
    let direct_visits = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; size],
            |mut acc, t| {
                let mut rng = stream(direct_seed, t);
                let mut xs = vec![0usize; layout.k];
                for &i in &free {
                    let l = inst.neighborhood_list(i);
                    xs[i] = l[rng.gen_range(0..l.len())];
                }
                let x = layout.point(&xs);
                let mut v = tree.root();
                acc[v] += 1;
                while let super::PdtNode::Query { form, children } = &tree.nodes[v] {
                    v = children[form.eval(&x) as usize];
                    acc[v] += 1;
                }
                acc
            },
        )
        .reduce(|| vec![0u64; size], add);
    let freq = |c: u64| c as f64 / trials.max(1) as f64;
    let leaf_tv = 0.5
        * tree
            .leaves()
            .into_iter()
            .map(|v| (freq(walk_visits[v]) - freq(direct_visits[v])).abs())
            .sum::<f64>();
    let max_node_gap = (0..size)
        .map(|v| (freq(walk_visits[v]) - freq(direct_visits[v])).abs())
        .fold(0.0, f64::max);
    Ok(DistributionReport {
        trials,
        walk_visits,
        direct_visits,
        leaf_tv,
        max_node_gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessReport {
    pub depth: usize,
    pub success: Tally,
    /// `exp(-32 d beta - 64 d^2 (1 - alpha))`.
    pub bound: f64,
    /// `empirical + 3σ >= bound`.
    pub pass: bool,
    /// Walks with more than `4d` loop iterations.
    pub overrun: Tally,
    pub overrun_bound: f64,
    pub overrun_pass: bool,
}

/// Non-FAIL frequency of the walk for a graph with verified `(alpha, beta, r)`
/// bounded common neighborhoods.
pub fn success_rate(
    inst: &NonEdgeInstance,
    tree: &ParityDecisionTree,
    alpha: f64,
    beta: f64,
    r: usize,
    trials: u64,
    seed: u64,
) -> Result<SuccessReport, PdtError> {
    let d = tree.depth();
    if inst.m().len() + 8 * d > r {
        return Err(PdtError::Precondition(format!("|M| + 8d = {} exceeds R = {r}", inst.m().len() + 8 * d)));
    }
    let (ok, over) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let w = simulate_walk(inst, tree, &mut stream(seed, t))?;
            Ok::<_, PdtError>((w.is_success() as u64, (w.iterations() > 4 * d) as u64))
        })
        .try_reduce(|| (0u64, 0u64), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let success = Tally::new(ok, trials);
    let overrun = Tally::new(over, trials);
    let bound = stats::walk_success_bound(d, alpha, beta);
    let overrun_bound = stats::overrun_bound(d);
    Ok(SuccessReport {
        depth: d,
        success,
        bound,
        pass: stats::within_lower(success.freq(), bound, trials),
        overrun,
        overrun_bound,
        overrun_pass: stats::within_upper(overrun.freq(), overrun_bound, trials),
    })
}
