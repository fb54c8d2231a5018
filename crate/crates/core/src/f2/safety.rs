//! Safe and dangerous sets of linear forms, and the closure.
//!
//! Everything here depends on the span of the given forms only: they are first
//! reduced to a basis, and `F[\S]` means the span of the forms with blocks `S`
//! zeroed.

use serde::Serialize;

use super::form::{Layout, LinearForm};
use super::matroid::{max_common_independent, LinearMatroid, PartitionMatroid};
use super::system::basis;
use crate::bits::BitSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SafetyReport {
    pub rank: usize,
    /// Variables, pairwise in distinct blocks, with independent columns.
    pub transversal: Vec<usize>,
    pub safe: bool,
}

/// Column of each variable in the coefficient matrix of `rows`.
fn columns(layout: &Layout, rows: &[LinearForm]) -> Vec<BitSet> {
    let mut cols = vec![BitSet::new(rows.len()); layout.dims()];
    for (r, f) in rows.iter().enumerate() {
        for v in f.vars() {
            cols[v].insert(r);
        }
    }
    cols
}

/// Size of the largest set of variables with independent columns and at most
/// `caps[i]` variables from block `i`.
fn matched(layout: &Layout, rows: &[LinearForm], caps: Vec<usize>) -> Vec<usize> {
    let part = (0..layout.dims()).map(|v| layout.block_of(v)).collect();
    let pm = PartitionMatroid { part, caps };
    let lin = LinearMatroid {
        columns: columns(layout, rows),
    };
    max_common_independent(&pm, &lin)
}

pub fn safety_report(layout: &Layout, forms: &[LinearForm]) -> SafetyReport {
    let rows = basis(forms);
    let transversal = matched(layout, &rows, vec![1; layout.k]);
    SafetyReport {
        rank: rows.len(),
        safe: transversal.len() == rows.len(),
        transversal,
    }
}

/// Whether the span of `forms` is safe.
pub fn is_safe(layout: &Layout, forms: &[LinearForm]) -> bool {
    safety_report(layout, forms).safe
}

/// The forms with blocks `s` zeroed.
pub fn zero_blocks(layout: &Layout, forms: &[LinearForm], s: &BitSet) -> Vec<LinearForm> {
    forms.iter().map(|f| f.zero_blocks(layout, s)).collect()
}

/// `Cl(F)`: the unique inclusion-minimal block set `S` with `F[\S]` safe.
///
/// Block `b` is in the closure exactly when lifting the one-per-block cap on
/// `b` enlarges the maximum transversal.
pub fn closure(layout: &Layout, forms: &[LinearForm]) -> BitSet {
    let rows = basis(forms);
    let mut out = BitSet::new(layout.k);
    let base = matched(layout, &rows, vec![1; layout.k]).len();
    if base == rows.len() {
        return out;
    }
    let mut mentioned = BitSet::new(layout.k);
    for f in &rows {
        mentioned.union_with(&f.blocks(layout));
    }
    for b in mentioned.iter() {
        let mut caps = vec![1; layout.k];
        caps[b] = layout.bits;
        if matched(layout, &rows, caps).len() > base {
            out.insert(b);
        }
    }
    out
}
