//! F2 linear algebra over block-structured variables `x_{i,j}`.

pub mod form;
pub mod matroid;
pub mod restriction;
pub mod safety;
pub mod system;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use form::{Equation, Layout, LinearForm};
pub use restriction::{Affine, AffineRestriction, RestrictionError};
pub use safety::{closure, is_safe, safety_report, SafetyReport};
pub use system::{basis, rank_of, Echelon, Insert, LinearSystem, SystemError};

use crate::bits::BitSet;
use crate::rng::stream;
use crate::stats::{self, Tally};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExperimentError {
    #[error("block {block}: |A_i| = {size} is below 2n/3 for n = {n}")]
    SmallAllowedSet { block: usize, size: usize, n: usize },
    #[error("expected {want} allowed sets, got {got}")]
    Arity { want: usize, got: usize },
}

/// A system of exactly `rank` independent random equations with random
/// right-hand sides.
pub fn random_system<R: Rng>(layout: &Layout, rank: usize, rng: &mut R) -> LinearSystem {
    let dims = layout.dims();
    assert!(rank <= dims);
    let mut s = LinearSystem::new(dims);
    while s.rank() < rank {
        let f = LinearForm::from_vars(dims, (0..dims).filter(|_| rng.gen_bool(0.5)));
        if f.is_zero() || s.echelon().spans(&f) {
            continue;
        }
        s.push(Equation::new(f, rng.gen()));
    }
    s
}

/// Uniform `size`-subsets of `[0, n)`, one per block.
pub fn random_allowed_sets<R: Rng>(n: usize, k: usize, size: usize, rng: &mut R) -> Vec<BitSet> {
    (0..k)
        .map(|_| {
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(rng);
            BitSet::from_indices(n, all.into_iter().take(size))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankProbability {
    pub rank: usize,
    pub tally: Tally,
    /// `(3/4)^rank`.
    pub bound: f64,
    /// Whether the empirical frequency stays within `bound + 3σ`.
    pub pass: bool,
}

/// Probability that `x` with `x_i` uniform in `allowed[i]` satisfies `psi`.
pub fn rank_probability_experiment(
    layout: &Layout,
    psi: &LinearSystem,
    allowed: &[BitSet],
    trials: u64,
    seed: u64,
) -> Result<RankProbability, ExperimentError> {
    if allowed.len() != layout.k {
        return Err(ExperimentError::Arity {
            want: layout.k,
            got: allowed.len(),
        });
    }
    let n = 1usize << layout.bits;
    for (i, a) in allowed.iter().enumerate() {
        if 3 * a.count() < 2 * n {
            return Err(ExperimentError::SmallAllowedSet {
                block: i,
                size: a.count(),
                n,
            });
        }
    }
    let lists: Vec<Vec<usize>> = allowed.iter().map(|a| a.iter().collect()).collect();
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = stream(seed, t);
            let xs: Vec<usize> = lists.iter().map(|l| l[rng.gen_range(0..l.len())]).collect();
            psi.satisfied_by(&layout.point(&xs))
        })
        .count() as u64;
    let rank = psi.rank();
    let bound = stats::rank_bound(rank);
    let tally = Tally::new(hits, trials);
    Ok(RankProbability {
        rank,
        tally,
        bound,
        pass: stats::within_upper(tally.freq(), bound, trials),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_zero_always_satisfied() {
        let l = Layout::new(2, 2);
        let full = vec![BitSet::full(4); 2];
        let r = rank_probability_experiment(&l, &LinearSystem::new(4), &full, 1000, 1).unwrap();
        assert_eq!((r.tally.freq(), r.bound), (1.0, 1.0));
    }

    #[test]
    fn single_bit_is_about_half() {
        let l = Layout::new(2, 2);
        let psi = LinearSystem::from_equations(4, [Equation::new(LinearForm::var(4, 0), false)]);
        let full = vec![BitSet::full(4); 2];
        let r = rank_probability_experiment(&l, &psi, &full, 20_000, 2).unwrap();
        assert!((r.tally.freq() - 0.5).abs() < 0.02);
        assert!(r.pass);
    }

    #[test]
    fn small_allowed_sets_rejected() {
        let l = Layout::new(1, 2);
        let a = vec![BitSet::from_indices(4, [0, 1])];
        assert!(matches!(
            rank_probability_experiment(&l, &LinearSystem::new(2), &a, 10, 0),
            Err(ExperimentError::SmallAllowedSet { .. })
        ));
    }

    #[test]
    fn random_system_has_requested_rank() {
        let l = Layout::new(8, 4);
        let mut rng = stream(3, 3);
        for r in 0..=6 {
            assert_eq!(random_system(&l, r, &mut rng).rank(), r);
        }
    }
}
