//! Parity decision trees for the NonEdge search problem, the random walk
//! simulator over them, and restriction extraction from successful walks.

pub mod experiment;
pub mod extract;
pub mod tree;
pub mod walk;

use thiserror::Error;

pub use experiment::{success_rate, walk_distribution_test, DistributionReport, SuccessReport};
pub use extract::{extract_restriction, Extraction};
pub use tree::{LeafLabel, ParityDecisionTree, PdtNode, TreeError};
pub use walk::{simulate_walk, Outcome, Step, WalkTranscript};

use crate::bits::BitSet;
use crate::f2::{Layout, RestrictionError};
use crate::graph::{log2, EdgeOracle, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PdtError {
    #[error("M has two vertices in block {0}")]
    RepeatedBlock(usize),
    #[error("M is not a clique: {0:?} and {1:?} are not adjacent")]
    NotClique(VertexId, VertexId),
    #[error("vertex {0:?} out of range")]
    OutOfRange(VertexId),
    #[error("common neighborhood of M in block {0} is empty")]
    EmptyNeighborhood(usize),
    #[error("query mentions block {0}, which holds a vertex of M")]
    QueryOutsideDomain(usize),
    #[error("tree layout {got:?} does not match the instance layout {want:?}")]
    Layout { want: Layout, got: Layout },
    #[error("choice for block {block} is outside the common neighborhood of M")]
    OutsideNeighborhood { block: usize },
    #[error("expected a choice for every free block")]
    MissingChoice,
    #[error("precondition {0} violated")]
    Precondition(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("the transcript is a FAIL run")]
    FailedWalk,
    #[error(transparent)]
    Restriction(#[from] RestrictionError),
}

/// `NonEdge_M` on a block graph: `M` holds at most one vertex per block and is
/// pairwise adjacent. The free blocks are the others.
pub struct NonEdgeInstance<'a> {
    graph: &'a dyn EdgeOracle,
    m: Vec<VertexId>,
    /// `N^∩(M, i)` for each free block, `None` on blocks of `M`.
    cn: Vec<Option<BitSet>>,
    lists: Vec<Vec<usize>>,
}

impl<'a> NonEdgeInstance<'a> {
    pub fn new(graph: &'a dyn EdgeOracle, m: Vec<VertexId>) -> Result<Self, PdtError> {
        let (n, k) = (graph.n(), graph.k());
        let mut taken = vec![false; k];
        for &u in &m {
            if u.block >= k || u.index >= n {
                return Err(PdtError::OutOfRange(u));
            }
            if std::mem::replace(&mut taken[u.block], true) {
                return Err(PdtError::RepeatedBlock(u.block));
            }
        }
        for (a, &u) in m.iter().enumerate() {
            for &v in &m[a + 1..] {
                if !graph.has_edge(u, v) {
                    return Err(PdtError::NotClique(u, v));
                }
            }
        }
        let cn: Vec<Option<BitSet>> = (0..k)
            .map(|i| {
                (!taken[i]).then(|| {
                    BitSet::from_indices(n, (0..n).filter(|&y| m.iter().all(|&u| graph.has_edge(u, VertexId::new(i, y)))))
                })
            })
            .collect();
        let lists = cn.iter().map(|c| c.as_ref().map_or_else(Vec::new, |c| c.iter().collect())).collect();
        Ok(Self { graph, m, cn, lists })
    }

    pub fn graph(&self) -> &dyn EdgeOracle {
        self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn k(&self) -> usize {
        self.graph.k()
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.k(), log2(self.n()))
    }

    pub fn m(&self) -> &[VertexId] {
        &self.m
    }

    /// `[k] \ B(M)`.
    pub fn free_blocks(&self) -> BitSet {
        BitSet::from_indices(self.k(), (0..self.k()).filter(|&i| self.cn[i].is_some()))
    }

    pub fn is_free(&self, i: usize) -> bool {
        self.cn[i].is_some()
    }

    /// `N^∩(M, i)`; `None` for blocks of `M`.
    pub fn neighborhood(&self, i: usize) -> Option<&BitSet> {
        self.cn[i].as_ref()
    }

    pub(crate) fn neighborhood_list(&self, i: usize) -> &[usize] {
        &self.lists[i]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.graph.has_edge(u, v)
    }
}

/// Least non-adjacent pair of selected vertices, pairs ordered by
/// `(block_u, block_v, index_u, index_v)`. `choice[i]` must be `Some` exactly
/// on the free blocks.
pub fn nonedge_oracle(inst: &NonEdgeInstance, choice: &[Option<usize>]) -> Result<Option<(VertexId, VertexId)>, PdtError> {
    if choice.len() != inst.k() {
        return Err(PdtError::MissingChoice);
    }
    let mut picked = Vec::new();
    for (i, c) in choice.iter().enumerate() {
        match (inst.neighborhood(i), c) {
            (Some(cn), Some(y)) => {
                if !cn.contains(*y) {
                    return Err(PdtError::OutsideNeighborhood { block: i });
                }
                picked.push(VertexId::new(i, *y));
            }
            (Some(_), None) => return Err(PdtError::MissingChoice),
            (None, Some(_)) => return Err(PdtError::OutsideNeighborhood { block: i }),
            (None, None) => {}
        }
    }
    for (a, &u) in picked.iter().enumerate() {
        for &v in &picked[a + 1..] {
            if !inst.has_edge(u, v) {
                return Ok(Some((u, v)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{encode_block_clique, search_falsified, Assignment, ClauseTag};
    use crate::graph::BlockGraph;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn instance_validation() {
        let g = BlockGraph::empty(4, 3).unwrap();
        let e = NonEdgeInstance::new(&g, vec![VertexId::new(0, 1), VertexId::new(1, 1)]);
        assert!(matches!(e, Err(PdtError::NotClique(..))));
        let e = NonEdgeInstance::new(&g, vec![VertexId::new(0, 1), VertexId::new(0, 2)]);
        assert!(matches!(e, Err(PdtError::RepeatedBlock(0))));
        let inst = NonEdgeInstance::new(&g, vec![VertexId::new(2, 0)]).unwrap();
        assert_eq!(inst.free_blocks().iter().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(inst.neighborhood(0).unwrap().count(), 0);
    }

    #[test]
    fn complete_graph_has_no_nonedge() {
        let g = BlockGraph::complete(4, 3).unwrap();
        let inst = NonEdgeInstance::new(&g, vec![]).unwrap();
        assert_eq!(nonedge_oracle(&inst, &[Some(0), Some(3), Some(2)]).unwrap(), None);
    }

    #[test]
    fn edgeless_pair_is_reported() {
        let g = BlockGraph::empty(2, 2).unwrap();
        let inst = NonEdgeInstance::new(&g, vec![]).unwrap();
        assert_eq!(
            nonedge_oracle(&inst, &[Some(1), Some(0)]).unwrap(),
            Some((VertexId::new(0, 1), VertexId::new(1, 0)))
        );
    }

    #[test]
    fn choice_outside_neighborhood_rejected() {
        let mut g = BlockGraph::empty(2, 2).unwrap();
        g.add_edge(VertexId::new(0, 0), VertexId::new(1, 1)).unwrap();
        let inst = NonEdgeInstance::new(&g, vec![VertexId::new(0, 0)]).unwrap();
        assert_eq!(
            nonedge_oracle(&inst, &[None, Some(0)]),
            Err(PdtError::OutsideNeighborhood { block: 1 })
        );
    }

    /// With `M = ∅` the oracle's answer is the first falsified clause of the
    /// block encoding.
    #[test]
    fn matches_first_falsified_block_clause() {
        let mut rng = stream(61, 0);
        for t in 0..200 {
            let k = rng.gen_range(2..=4);
            let g = BlockGraph::sample(4, rng.gen_range(0.3..0.9), k, t).unwrap();
            let inst = NonEdgeInstance::new(&g, vec![]).unwrap();
            let picks: Vec<usize> = (0..k).map(|_| rng.gen_range(0..4)).collect();
            let got = nonedge_oracle(&inst, &picks.iter().map(|&y| Some(y)).collect::<Vec<_>>()).unwrap();
            let f = encode_block_clique(&g);
            let a = Assignment::from_columns(&f.var_map, &picks);
            let want = search_falsified(&f, &a).unwrap().map(|c| match f.tags[c] {
                ClauseTag::BlockEdge { u, v } => (u, v),
                ref other => panic!("unexpected tag {other:?}"),
            });
            assert_eq!(got, want);
        }
    }
}
