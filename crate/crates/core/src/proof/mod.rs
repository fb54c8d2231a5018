//! Checkers for semantic cutting planes and resolution over parities, and
//! their top-down translations into shape-DAGs.

pub mod build;
pub mod cp;
pub mod dag;
pub mod resplus;
mod text;

use rayon::prelude::*;
use thiserror::Error;

pub use build::{
    cp_mutations, edgeless_cp_refutation, edgeless_resplus_refutation, resolution_to_cp, resplus_mutations, tree_resolution,
};
pub use cp::{cp_axioms, verify_cp, CpJust, CpLine, CpProof, Ineq, Q};
pub use dag::{cp_to_triangle_dag, resplus_to_affine_dag, validate_triangle_dag, AffineDag, AffineEdge, AffineNode, VarSplit};
pub use resplus::{verify_resplus, LinearClause, ResPlusProof, ResPlusReport, RlinJust, RlinLine};

use crate::bits::BitSet;

/// Default cap on the number of variables for semantic checks.
pub const DEFAULT_VAR_BUDGET: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProofError {
    #[error("line {line}: {reason}")]
    Step { line: usize, reason: String },
    #[error("{vars} variables exceed the budget of {budget}")]
    Budget { vars: usize, budget: usize },
    #[error("proof has no lines")]
    Empty,
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("translation: {0}")]
    Translation(String),
}

pub(crate) fn step(line: usize, reason: impl Into<String>) -> ProofError {
    ProofError::Step {
        line,
        reason: reason.into(),
    }
}

pub(crate) fn check_budget(vars: usize, budget: usize) -> Result<(), ProofError> {
    if vars > budget || vars > 30 {
        return Err(ProofError::Budget {
            vars,
            budget: budget.min(30),
        });
    }
    Ok(())
}

/// The points of `{0,1}^n` (bit `v` of the index is variable `v`) where `pred` holds.
pub(crate) fn points(n: usize, pred: impl Fn(u64) -> bool + Sync) -> BitSet {
    let total = 1usize << n;
    let words: Vec<u64> = (0..total.div_ceil(64))
        .into_par_iter()
        .map(|w| {
            let mut word = 0u64;
            for b in 0..64 {
                let p = w * 64 + b;
                if p < total && pred(p as u64) {
                    word |= 1 << b;
                }
            }
            word
        })
        .collect();
    BitSet::from_words(total, &words)
}
