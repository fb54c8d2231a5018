//! Desk-scale experiments around binary-encoded clique formulas over random
//! k-partite graphs.

pub mod bits;
pub mod bottleneck;
pub mod cli;
pub mod cnf;
pub mod comm;
pub mod density;
pub mod f2;
pub mod graph;
pub mod pdt;
pub mod proof;
pub mod rng;
pub mod stats;

pub use bits::BitSet;
pub use graph::{BlockGraph, EdgeOracle, GnpkModel, SimpleGraph, VertexId};
