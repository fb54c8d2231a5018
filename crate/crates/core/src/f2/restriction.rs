use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::form::{Equation, Layout, LinearForm};
use super::system::LinearSystem;
use crate::bits::BitSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RestrictionError {
    #[error("block {0} is not free")]
    NotFree(usize),
    #[error("expression for block {0} mentions a variable outside the free blocks")]
    OutsideFree(usize),
    #[error("variable of block {0} is neither free nor fixed")]
    Unassigned(usize),
    #[error("block {block} needs {want} expressions, got {got}")]
    Arity { block: usize, want: usize, got: usize },
}

/// Affine expression `form + constant` over free-block variables.
pub type Affine = (LinearForm, bool);

/// Block-respecting affine restriction. Blocks are free, fixed (each variable
/// an affine function of free-block variables) or untouched: outside the
/// domain altogether, as the blocks of `M` are for the walk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineRestriction {
    layout: Layout,
    free: BitSet,
    exprs: Vec<Option<Affine>>,
}

impl AffineRestriction {
    /// Nothing fixed; `free` lists the free blocks.
    pub fn new(layout: Layout, free: BitSet) -> Self {
        assert_eq!(free.len(), layout.k);
        Self {
            layout,
            free,
            exprs: vec![None; layout.dims()],
        }
    }

    pub fn identity(layout: Layout) -> Self {
        Self::new(layout, BitSet::full(layout.k))
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn free_blocks(&self) -> &BitSet {
        &self.free
    }

    pub fn is_free(&self, i: usize) -> bool {
        self.free.contains(i)
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.exprs[self.layout.var(i, 0)].is_some()
    }

    pub fn fixed_blocks(&self) -> BitSet {
        BitSet::from_indices(self.layout.k, (0..self.layout.k).filter(|&i| self.layout.bits > 0 && self.is_fixed(i)))
    }

    pub fn expr(&self, v: usize) -> Option<&Affine> {
        self.exprs[v].as_ref()
    }

    /// Variables of free blocks, as a bitset over all coordinates.
    pub fn free_vars(&self) -> BitSet {
        let mut s = BitSet::new(self.layout.dims());
        for i in self.free.iter() {
            for v in self.layout.block_vars(i) {
                s.insert(v);
            }
        }
        s
    }

    /// Fix block `i`: bit `j` becomes `exprs[j]`, which may mention free blocks
    /// other than `i`. Earlier expressions mentioning block `i` are rewritten.
    pub fn fix_block(&mut self, i: usize, exprs: Vec<Affine>) -> Result<(), RestrictionError> {
        if !self.free.contains(i) {
            return Err(RestrictionError::NotFree(i));
        }
        if exprs.len() != self.layout.bits {
            return Err(RestrictionError::Arity {
                block: i,
                want: self.layout.bits,
                got: exprs.len(),
            });
        }
        self.free.remove(i);
        let allowed = self.free_vars();
        if exprs.iter().any(|(f, _)| !f.0.is_subset(&allowed)) {
            self.free.insert(i);
            return Err(RestrictionError::OutsideFree(i));
        }
        let range = self.layout.block_vars(i);
        for slot in self.exprs.iter_mut().flatten() {
            let hits: Vec<usize> = slot.0.vars().filter(|v| range.contains(v)).collect();
            for v in hits {
                let (f, c) = &exprs[v - range.start];
                slot.0 .0.toggle(v);
                slot.0.add(f);
                slot.1 ^= c;
            }
        }
        for (j, e) in exprs.into_iter().enumerate() {
            self.exprs[range.start + j] = Some(e);
        }
        Ok(())
    }

    /// Fix block `i` to the constant vertex index `x`.
    pub fn fix_block_const(&mut self, i: usize, x: usize) -> Result<(), RestrictionError> {
        let bits = self.layout.bits;
        let dims = self.layout.dims();
        let exprs = (0..bits)
            .map(|j| (LinearForm::zero(dims), (x >> (bits - 1 - j)) & 1 == 1))
            .collect();
        self.fix_block(i, exprs)
    }

    /// `form` after substitution, as an affine function of free variables.
    pub fn substitute(&self, form: &LinearForm) -> Result<Affine, RestrictionError> {
        let mut out = LinearForm::zero(self.layout.dims());
        let mut c = false;
        for v in form.vars() {
            let b = self.layout.block_of(v);
            if self.free.contains(b) {
                out.0.toggle(v);
            } else if let Some((f, k)) = &self.exprs[v] {
                out.add(f);
                c ^= k;
            } else {
                return Err(RestrictionError::Unassigned(b));
            }
        }
        Ok((out, c))
    }

    pub fn substitute_eq(&self, eq: &Equation) -> Result<Equation, RestrictionError> {
        let (f, c) = self.substitute(&eq.form)?;
        Ok(Equation::new(f, eq.rhs ^ c))
    }

    /// `Ψ|_ρ`.
    pub fn restrict(&self, system: &LinearSystem) -> Result<LinearSystem, RestrictionError> {
        let mut out = LinearSystem::new(system.dims());
        for e in system.equations() {
            out.push(self.substitute_eq(e)?);
        }
        Ok(out)
    }

    /// Complete a point: free coordinates are read from `point`, fixed ones
    /// computed, untouched ones left as in `point`.
    pub fn extend(&self, point: &BitSet) -> BitSet {
        let mut out = point.clone();
        for (v, e) in self.exprs.iter().enumerate() {
            if let Some((f, c)) = e {
                out.set(v, f.eval(point) ^ c);
            }
        }
        out
    }

    /// Every expression mentions free-block variables only.
    pub fn is_normalized(&self) -> bool {
        let allowed = self.free_vars();
        self.exprs.iter().flatten().all(|(f, _)| f.0.is_subset(&allowed))
    }

    /// The equations `x_v = expr_v` for all fixed variables.
    pub fn as_system(&self) -> LinearSystem {
        let dims = self.layout.dims();
        let mut s = LinearSystem::new(dims);
        for (v, e) in self.exprs.iter().enumerate() {
            if let Some((f, c)) = e {
                let mut form = f.clone();
                form.0.toggle(v);
                s.push(Equation::new(form, *c));
            }
        }
        s
    }
}
