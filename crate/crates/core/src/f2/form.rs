use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitSet;

/// Variables `x_{i,j}` for blocks `i < k` and bits `j < bits`, numbered
/// block-major: `x_{i,j}` is coordinate `i * bits + j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layout {
    pub k: usize,
    pub bits: usize,
}

impl Layout {
    pub fn new(k: usize, bits: usize) -> Self {
        Self { k, bits }
    }

    pub fn dims(&self) -> usize {
        self.k * self.bits
    }

    #[inline]
    pub fn var(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.k && j < self.bits);
        i * self.bits + j
    }

    #[inline]
    pub fn block_of(&self, v: usize) -> usize {
        v / self.bits
    }

    #[inline]
    pub fn bit_of(&self, v: usize) -> usize {
        v % self.bits
    }

    pub fn block_vars(&self, i: usize) -> std::ops::Range<usize> {
        i * self.bits..(i + 1) * self.bits
    }

    /// Coordinates of a vertex index `x` placed in block `i`; bit 0 is the
    /// most significant.
    pub fn set_block_value(&self, point: &mut BitSet, i: usize, x: usize) {
        for j in 0..self.bits {
            point.set(self.var(i, j), (x >> (self.bits - 1 - j)) & 1 == 1);
        }
    }

    pub fn block_value(&self, point: &BitSet, i: usize) -> usize {
        (0..self.bits).fold(0, |acc, j| (acc << 1) | point.contains(self.var(i, j)) as usize)
    }

    /// Point with block `i` holding `xs[i]`.
    pub fn point(&self, xs: &[usize]) -> BitSet {
        let mut p = BitSet::new(self.dims());
        for (i, &x) in xs.iter().enumerate() {
            self.set_block_value(&mut p, i, x);
        }
        p
    }
}

/// A homogeneous linear form over F2.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearForm(pub BitSet);

impl LinearForm {
    pub fn zero(dims: usize) -> Self {
        Self(BitSet::new(dims))
    }

    pub fn var(dims: usize, v: usize) -> Self {
        Self(BitSet::from_indices(dims, [v]))
    }

    pub fn from_vars(dims: usize, vars: impl IntoIterator<Item = usize>) -> Self {
        let mut f = Self::zero(dims);
        for v in vars {
            f.0.toggle(v);
        }
        f
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, point: &BitSet) -> bool {
        self.0.dot(point)
    }

    pub fn add(&mut self, other: &LinearForm) {
        self.0.xor_with(&other.0);
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter()
    }

    /// Blocks mentioned by the form.
    pub fn blocks(&self, layout: &Layout) -> BitSet {
        let mut b = BitSet::new(layout.k);
        for v in self.0.iter() {
            b.insert(layout.block_of(v));
        }
        b
    }

    /// The form with every variable of a block in `blocks` set to zero.
    pub fn zero_blocks(&self, layout: &Layout, blocks: &BitSet) -> LinearForm {
        let mut out = self.clone();
        for i in blocks.iter() {
            for v in layout.block_vars(i) {
                out.0.remove(v);
            }
        }
        out
    }

    /// `0`/`1` coefficient string.
    pub fn to_bitstring(&self) -> String {
        (0..self.dims())
            .map(|v| if self.0.contains(v) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bitstring(s: &str) -> Option<Self> {
        let mut f = Self::zero(s.len());
        for (v, c) in s.chars().enumerate() {
            match c {
                '1' => f.0.insert(v),
                '0' => {}
                _ => return None,
            }
        }
        Some(f)
    }
}

impl fmt::Debug for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.0.iter().map(|v| format!("x{v}")).collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// `form = rhs`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Equation {
    pub form: LinearForm,
    pub rhs: bool,
}

impl Equation {
    pub fn new(form: LinearForm, rhs: bool) -> Self {
        Self { form, rhs }
    }

    pub fn holds(&self, point: &BitSet) -> bool {
        self.form.eval(point) == self.rhs
    }
}

impl fmt::Debug for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}={}", self.form, self.rhs as u8)
    }
}
