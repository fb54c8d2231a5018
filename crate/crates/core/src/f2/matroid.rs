//! Matroid intersection by shortest augmenting paths.

use std::collections::VecDeque;

use crate::bits::BitSet;
use crate::f2::system::Echelon;
use crate::f2::form::{Equation, LinearForm};

pub trait Matroid {
    fn ground_size(&self) -> usize;
    fn independent(&self, set: &[usize]) -> bool;
}

/// At most `caps[part[e]]` elements from each part.
#[derive(Debug, Clone)]
pub struct PartitionMatroid {
    pub part: Vec<usize>,
    pub caps: Vec<usize>,
}

impl Matroid for PartitionMatroid {
    fn ground_size(&self) -> usize {
        self.part.len()
    }

    fn independent(&self, set: &[usize]) -> bool {
        let mut used = vec![0usize; self.caps.len()];
        for &e in set {
            let p = self.part[e];
            used[p] += 1;
            if used[p] > self.caps[p] {
                return false;
            }
        }
        true
    }
}

/// Linear independence of F2 column vectors.
#[derive(Debug, Clone)]
pub struct LinearMatroid {
    pub columns: Vec<BitSet>,
}

impl Matroid for LinearMatroid {
    fn ground_size(&self) -> usize {
        self.columns.len()
    }

    fn independent(&self, set: &[usize]) -> bool {
        let mut e = Echelon::default();
        set.iter().all(|&i| {
            let eq = Equation::new(LinearForm(self.columns[i].clone()), false);
            e.insert(&eq) == crate::f2::system::Insert::Independent
        })
    }
}

fn with(set: &[usize], add: usize) -> Vec<usize> {
    let mut v = set.to_vec();
    v.push(add);
    v
}

fn swap(set: &[usize], out: usize, add: usize) -> Vec<usize> {
    let mut v: Vec<usize> = set.iter().copied().filter(|&x| x != out).collect();
    v.push(add);
    v
}

/// A maximum-cardinality set independent in both matroids.
pub fn max_common_independent<A: Matroid, B: Matroid>(m1: &A, m2: &B) -> Vec<usize> {
    let n = m1.ground_size();
    assert_eq!(n, m2.ground_size());
    let mut current: Vec<usize> = Vec::new();
    loop {
        let mut inside = vec![false; n];
        for &e in &current {
            inside[e] = true;
        }
        let outside: Vec<usize> = (0..n).filter(|&e| !inside[e]).collect();
        let sources: Vec<usize> = outside
            .iter()
            .copied()
            .filter(|&z| m1.independent(&with(&current, z)))
            .collect();
        let sinks: Vec<bool> = (0..n)
            .map(|z| !inside[z] && m2.independent(&with(&current, z)))
            .collect();
        // BFS over the exchange graph: z -> y when I - y + z is independent in m2,
        // y -> z when I - y + z is independent in m1.
        let mut prev: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &s in &sources {
            seen[s] = true;
            queue.push_back(s);
        }
        let mut end = None;
        while let Some(u) = queue.pop_front() {
            if !inside[u] && sinks[u] {
                end = Some(u);
                break;
            }
            if inside[u] {
                for &z in &outside {
                    if !seen[z] && m1.independent(&swap(&current, u, z)) {
                        seen[z] = true;
                        prev[z] = Some(u);
                        queue.push_back(z);
                    }
                }
            } else {
                for &y in &current {
                    if !seen[y] && m2.independent(&swap(&current, y, u)) {
                        seen[y] = true;
                        prev[y] = Some(u);
                        queue.push_back(y);
                    }
                }
            }
        }
        let Some(mut at) = end else {
            current.sort_unstable();
            return current;
        };
        let mut path = vec![at];
        while let Some(p) = prev[at] {
            path.push(p);
            at = p;
        }
        for e in path {
            inside[e] = !inside[e];
        }
        current = (0..n).filter(|&e| inside[e]).collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Largest common independent set by exhaustive search.
    fn brute<A: Matroid, B: Matroid>(m1: &A, m2: &B) -> usize {
        let n = m1.ground_size();
        (0..1u32 << n)
            .filter_map(|w| {
                let s: Vec<usize> = (0..n).filter(|b| (w >> b) & 1 == 1).collect();
                (m1.independent(&s) && m2.independent(&s)).then_some(s.len())
            })
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn bipartite_matching_as_intersection() {
        // Edges of K_{2,2} minus one edge: (0,0), (0,1), (1,0).
        let left = PartitionMatroid { part: vec![0, 0, 1], caps: vec![1, 1] };
        let right = PartitionMatroid { part: vec![0, 1, 0], caps: vec![1, 1] };
        assert_eq!(max_common_independent(&left, &right).len(), 2);
    }

    #[test]
    fn random_instances_match_brute_force() {
        use rand::Rng;
        let mut rng = crate::rng::stream(31, 0);
        for _ in 0..200 {
            let n = rng.gen_range(1..10);
            let dims = rng.gen_range(1..5);
            let columns: Vec<BitSet> = (0..n)
                .map(|_| BitSet::from_indices(dims, (0..dims).filter(|_| rng.gen_bool(0.5))))
                .collect();
            let parts = rng.gen_range(1..4);
            let part: Vec<usize> = (0..n).map(|_| rng.gen_range(0..parts)).collect();
            let caps: Vec<usize> = (0..parts).map(|_| rng.gen_range(1..3)).collect();
            let lin = LinearMatroid { columns };
            let pm = PartitionMatroid { part, caps };
            let got = max_common_independent(&pm, &lin);
            assert!(pm.independent(&got) && lin.independent(&got));
            assert_eq!(got.len(), brute(&pm, &lin));
        }
    }
}
