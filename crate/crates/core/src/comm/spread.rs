use serde::Serialize;

use super::CommError;
use crate::bits::BitSet;

/// Default cap on free coordinates for exhaustive subset enumeration.
pub const DEFAULT_FREE_BUDGET: usize = 16;

/// Min-entropy of the projection to `coords` of the uniform distribution on
/// `set`, a subset of `{0,1}^m` (bit `c` of an element is coordinate `c`).
pub fn min_entropy(set: &BitSet, coords: &[usize]) -> Result<f64, CommError> {
    let total = set.count();
    if total == 0 {
        return Err(CommError::EmptySet);
    }
    let mut counts = vec![0usize; 1 << coords.len()];
    for z in set.iter() {
        counts[project(z, coords)] += 1;
    }
    let max = *counts.iter().max().expect("nonempty");
    Ok((total as f64 / max as f64).log2())
}

fn project(z: usize, coords: &[usize]) -> usize {
    coords.iter().enumerate().fold(0, |acc, (t, &c)| acc | (((z >> c) & 1) << t))
}

/// Coordinates on which every element of a nonempty `set` agrees.
pub fn fixed_coords(set: &BitSet, m: usize) -> Vec<usize> {
    let mut it = set.iter();
    let Some(first) = it.next() else {
        return (0..m).collect();
    };
    let mut differ = 0usize;
    for z in it {
        differ |= z ^ first;
    }
    (0..m).filter(|c| (differ >> c) & 1 == 0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideSpread {
    pub fixed: Vec<usize>,
    pub free: Vec<usize>,
    /// Least `H∞(z_I) − γ|I|` over nonempty `I` of free coordinates; `0` when
    /// nothing is free.
    pub min_margin: f64,
    /// The subset attaining it, least by bitmask among ties.
    pub worst: Vec<usize>,
    pub spread: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadReport {
    pub gamma: f64,
    pub x: SideSpread,
    pub y: SideSpread,
    pub subcube_like: bool,
}

const EPS: f64 = 1e-9;

/// Fixed coordinates and spread of the free ones for one side. Every subset
/// of free coordinates is visited once by summing out coordinates in
/// increasing order, `O(3^f)` work for `f` free coordinates.
pub fn side_spread(set: &BitSet, m: usize, gamma: f64, budget: usize) -> Result<SideSpread, CommError> {
    let total = set.count();
    if total == 0 {
        return Err(CommError::EmptySet);
    }
    let fixed = fixed_coords(set, m);
    let free: Vec<usize> = (0..m).filter(|c| !fixed.contains(c)).collect();
    let f = free.len();
    if f > budget.min(24) {
        return Err(CommError::Budget { free: f, budget });
    }
    let mut hist = vec![0u32; 1 << f];
    for z in set.iter() {
        hist[project(z, &free)] += 1;
    }
    let mut best = (f64::INFINITY, 0usize);
    visit(&hist, (1usize << f) - 1, 0, f, total as f64, gamma, &mut best);
    let (min_margin, worst_mask) = if f == 0 { (0.0, 0) } else { best };
    let worst = (0..f).filter(|t| (worst_mask >> t) & 1 == 1).map(|t| free[t]).collect();
    Ok(SideSpread {
        fixed,
        free,
        min_margin,
        worst,
        spread: min_margin >= -EPS,
    })
}

/// `arr` is the marginal histogram over the coordinates in `mask` (ascending).
fn visit(arr: &[u32], mask: usize, start: usize, f: usize, total: f64, gamma: f64, best: &mut (f64, usize)) {
    if mask != 0 {
        let max = *arr.iter().max().expect("nonempty") as f64;
        let margin = (total / max).log2() - gamma * mask.count_ones() as f64;
        if margin < best.0 - EPS || (margin <= best.0 + EPS && mask < best.1) {
            *best = (margin, mask);
        }
    }
    for j in (start..f).filter(|j| (mask >> j) & 1 == 1) {
        // position of coordinate j within the compressed index
        let t = (mask & ((1 << j) - 1)).count_ones() as usize;
        let low = (1usize << t) - 1;
        let child: Vec<u32> = (0..arr.len() / 2)
            .map(|idx| {
                let base = ((idx & !low) << 1) | (idx & low);
                arr[base] + arr[base | 1 << t]
            })
            .collect();
        visit(&child, mask & !(1 << j), j + 1, f, total, gamma, best);
    }
}

/// Whether `xs × ys` is `γ`-subcube-like with respect to its fixed coordinates.
pub fn subcube_like_check(xs: &BitSet, ys: &BitSet, m: usize, gamma: f64, budget: usize) -> Result<SpreadReport, CommError> {
    let x = side_spread(xs, m, gamma, budget)?;
    let y = side_spread(ys, m, gamma, budget)?;
    let subcube_like = x.spread && y.spread;
    Ok(SpreadReport { gamma, x, y, subcube_like })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::seq::index::sample;

    fn oracle_min_margin(set: &BitSet, free: &[usize], gamma: f64) -> f64 {
        let mut best = f64::INFINITY;
        for mask in 1usize..1 << free.len() {
            let coords: Vec<usize> = (0..free.len()).filter(|t| (mask >> t) & 1 == 1).map(|t| free[t]).collect();
            let mut counts = std::collections::HashMap::new();
            for z in set.iter() {
                let key: Vec<usize> = coords.iter().map(|&c| (z >> c) & 1).collect();
                *counts.entry(key).or_insert(0usize) += 1;
            }
            let max = *counts.values().max().unwrap() as f64;
            best = best.min((set.count() as f64 / max).log2() - gamma * coords.len() as f64);
        }
        best
    }

    #[test]
    fn full_cube_and_singleton() {
        let full = BitSet::full(1 << 5);
        assert_eq!(min_entropy(&full, &[0, 1, 2, 3, 4]).unwrap(), 5.0);
        let one = BitSet::from_indices(1 << 5, [7]);
        assert_eq!(min_entropy(&one, &[0, 3]).unwrap(), 0.0);
        assert!(min_entropy(&BitSet::new(4), &[0]).is_err());
        let r = subcube_like_check(&full, &one, 5, 1.0, 16).unwrap();
        assert!(r.x.fixed.is_empty() && r.y.fixed.len() == 5 && r.subcube_like);
    }

    #[test]
    fn three_of_four_points() {
        // {00, 01, 10}: each coordinate is 0 with probability 2/3
        let s = BitSet::from_indices(4, [0b00, 0b01, 0b10]);
        let h = min_entropy(&s, &[0]).unwrap();
        assert!((h - (1.5f64).log2()).abs() < 1e-12);
        assert!(!side_spread(&s, 2, 0.9, 16).unwrap().spread);
        assert!(side_spread(&s, 2, 0.5, 16).unwrap().spread);
    }

    #[test]
    fn random_sets_match_direct_counts() {
        let mut rng = stream(17, 0);
        for _ in 0..20 {
            let set = BitSet::from_indices(256, sample(&mut rng, 256, 64));
            let coords: Vec<usize> = (0..8).filter(|_| rand::Rng::gen_bool(&mut rng, 0.5)).collect();
            let mut counts = vec![0usize; 256];
            for z in set.iter() {
                counts[coords.iter().fold(0, |a, &c| a * 2 + ((z >> c) & 1))] += 1;
            }
            let want = (64.0 / *counts.iter().max().unwrap() as f64).log2();
            assert!((min_entropy(&set, &coords).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_enforced() {
        let full = BitSet::full(1 << 6);
        assert!(matches!(side_spread(&full, 6, 0.9, 4), Err(CommError::Budget { free: 6, .. })));
    }

    proptest! {
        #[test]
        fn margins_match_subset_oracle(seed in 0u64..10_000, m in 1usize..9, size in 1usize..40, gamma in 0.1f64..1.0) {
            let mut rng = stream(seed, 1);
            let size = size.min(1 << m);
            let set = BitSet::from_indices(1 << m, sample(&mut rng, 1 << m, size).into_iter());
            let r = side_spread(&set, m, gamma, 16).unwrap();
            let fixed = fixed_coords(&set, m);
            prop_assert_eq!(&r.fixed, &fixed);
            if !r.free.is_empty() {
                prop_assert!((r.min_margin - oracle_min_margin(&set, &r.free, gamma)).abs() < 1e-9);
            }
        }
    }
}
