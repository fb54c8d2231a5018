use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::form::{Equation, LinearForm};
use crate::bits::BitSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SystemError {
    #[error("the system is inconsistent")]
    Inconsistent,
    #[error("line {0}: expected `<coefficient bits> <0|1>`")]
    Parse(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Outcome of adding an equation to an echelon basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insert {
    Independent,
    Implied,
    Contradiction,
}

/// Reduced row-echelon basis: each row has a distinct pivot (its lowest
/// variable) that no other row mentions.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Echelon {
    rows: Vec<(usize, Equation)>,
    inconsistent: bool,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    pub fn rows(&self) -> impl Iterator<Item = &Equation> {
        self.rows.iter().map(|(_, e)| e)
    }

    /// Pivot variable of each row.
    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|(p, _)| *p)
    }

    /// Reduce `form = rhs` against the basis.
    pub fn reduce(&self, form: &LinearForm, rhs: bool) -> (LinearForm, bool) {
        let mut f = form.clone();
        let mut c = rhs;
        for (p, e) in &self.rows {
            if f.0.contains(*p) {
                f.add(&e.form);
                c ^= e.rhs;
            }
        }
        (f, c)
    }

    pub fn insert(&mut self, eq: &Equation) -> Insert {
        let (f, c) = self.reduce(&eq.form, eq.rhs);
        let Some(p) = f.0.first() else {
            if c {
                self.inconsistent = true;
                return Insert::Contradiction;
            }
            return Insert::Implied;
        };
        for (_, row) in self.rows.iter_mut() {
            if row.form.0.contains(p) {
                row.form.add(&f);
                row.rhs ^= c;
            }
        }
        self.rows.push((p, Equation::new(f, c)));
        Insert::Independent
    }

    /// Whether `form` lies in the row space.
    pub fn spans(&self, form: &LinearForm) -> bool {
        self.reduce(form, false).0.is_zero()
    }

    /// Whether every solution satisfies `eq`. An inconsistent system implies everything.
    pub fn implies(&self, eq: &Equation) -> bool {
        if self.inconsistent {
            return true;
        }
        let (f, c) = self.reduce(&eq.form, eq.rhs);
        f.is_zero() && !c
    }

    /// Some solution, with free variables set to zero.
    pub fn solve(&self, dims: usize) -> Result<BitSet, SystemError> {
        if self.inconsistent {
            return Err(SystemError::Inconsistent);
        }
        let mut x = BitSet::new(dims);
        for (p, e) in &self.rows {
            x.set(*p, e.rhs);
        }
        Ok(x)
    }
}

/// An F2 linear system with its echelon form kept up to date.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSystem {
    dims: usize,
    eqs: Vec<Equation>,
    echelon: Echelon,
}

impl LinearSystem {
    pub fn new(dims: usize) -> Self {
        Self {
            dims,
            eqs: Vec::new(),
            echelon: Echelon::default(),
        }
    }

    pub fn from_equations(dims: usize, eqs: impl IntoIterator<Item = Equation>) -> Self {
        let mut s = Self::new(dims);
        for e in eqs {
            s.push(e);
        }
        s
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn push(&mut self, eq: Equation) -> Insert {
        debug_assert_eq!(eq.form.dims(), self.dims);
        let r = self.echelon.insert(&eq);
        self.eqs.push(eq);
        r
    }

    pub fn equations(&self) -> &[Equation] {
        &self.eqs
    }

    pub fn forms(&self) -> Vec<LinearForm> {
        self.eqs.iter().map(|e| e.form.clone()).collect()
    }

    pub fn echelon(&self) -> &Echelon {
        &self.echelon
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }

    pub fn is_empty(&self) -> bool {
        self.eqs.is_empty()
    }

    pub fn is_consistent(&self) -> bool {
        self.echelon.is_consistent()
    }

    pub fn solve(&self) -> Result<BitSet, SystemError> {
        self.echelon.solve(self.dims)
    }

    pub fn implies(&self, eq: &Equation) -> bool {
        self.echelon.implies(eq)
    }

    /// Whether every solution of `self` solves `other`.
    pub fn implies_system(&self, other: &LinearSystem) -> bool {
        other.eqs.iter().all(|e| self.implies(e))
    }

    pub fn satisfied_by(&self, point: &BitSet) -> bool {
        self.eqs.iter().all(|e| e.holds(point))
    }

    /// Lines of `<coefficient bits> <rhs>`.
    pub fn to_text(&self) -> String {
        self.eqs
            .iter()
            .map(|e| format!("{} {}\n", e.form.to_bitstring(), e.rhs as u8))
            .collect()
    }

    pub fn from_text(dims: usize, text: &str) -> Result<Self, SystemError> {
        let mut s = Self::new(dims);
        for (idx, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let mut parts = t.split_whitespace();
            let (Some(bits), Some(rhs), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(SystemError::Parse(idx + 1));
            };
            let form = LinearForm::from_bitstring(bits).ok_or(SystemError::Parse(idx + 1))?;
            if form.dims() != dims {
                return Err(SystemError::Dimension {
                    expected: dims,
                    got: form.dims(),
                });
            }
            let rhs = match rhs {
                "0" => false,
                "1" => true,
                _ => return Err(SystemError::Parse(idx + 1)),
            };
            s.push(Equation::new(form, rhs));
        }
        Ok(s)
    }
}

/// Rank of a list of vectors.
pub fn rank_of<'a>(dims: usize, forms: impl IntoIterator<Item = &'a LinearForm>) -> usize {
    let mut e = Echelon::default();
    for f in forms {
        debug_assert_eq!(f.dims(), dims);
        e.insert(&Equation::new(f.clone(), false));
    }
    e.rank()
}

/// An independent basis of the span of `forms`, in reduced echelon form.
pub fn basis<'a>(forms: impl IntoIterator<Item = &'a LinearForm>) -> Vec<LinearForm> {
    let mut e = Echelon::default();
    for f in forms {
        e.insert(&Equation::new(f.clone(), false));
    }
    e.rows().map(|r| r.form.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    /// Textbook elimination on a dense 0/1 matrix.
    fn naive_rank(rows: &[Vec<bool>]) -> usize {
        let mut m: Vec<Vec<bool>> = rows.to_vec();
        let cols = m.first().map_or(0, |r| r.len());
        let mut r = 0;
        for c in 0..cols {
            let Some(p) = (r..m.len()).find(|&i| m[i][c]) else { continue };
            m.swap(r, p);
            for i in 0..m.len() {
                if i != r && m[i][c] {
                    let pivot = m[r].clone();
                    for (a, b) in m[i].iter_mut().zip(pivot) {
                        *a ^= b;
                    }
                }
            }
            r += 1;
        }
        r
    }

    #[test]
    fn empty_and_duplicate() {
        assert_eq!(LinearSystem::new(4).rank(), 0);
        let f = LinearForm::from_vars(4, [1, 2]);
        let s = LinearSystem::from_equations(4, [Equation::new(f.clone(), true), Equation::new(f, true)]);
        assert_eq!(s.rank(), 1);
        assert!(s.is_consistent());
    }

    #[test]
    fn inconsistency_flagged() {
        let f = LinearForm::from_vars(3, [0]);
        let mut s = LinearSystem::new(3);
        s.push(Equation::new(f.clone(), false));
        assert_eq!(s.push(Equation::new(f, true)), Insert::Contradiction);
        assert_eq!(s.solve(), Err(SystemError::Inconsistent));
    }

    #[test]
    fn rank_matches_naive_elimination() {
        let mut rng = stream(11, 0);
        for _ in 0..300 {
            let rows: Vec<Vec<bool>> = (0..6).map(|_| (0..12).map(|_| rng.gen_bool(0.4)).collect()).collect();
            let forms: Vec<LinearForm> = rows
                .iter()
                .map(|r| LinearForm::from_vars(12, r.iter().enumerate().filter(|x| *x.1).map(|x| x.0)))
                .collect();
            assert_eq!(rank_of(12, &forms), naive_rank(&rows));
        }
    }

    #[test]
    fn solutions_satisfy() {
        let mut rng = stream(12, 0);
        for _ in 0..200 {
            let mut s = LinearSystem::new(10);
            for _ in 0..6 {
                let f = LinearForm::from_vars(10, (0..10).filter(|_| rng.gen_bool(0.3)));
                s.push(Equation::new(f, rng.gen()));
            }
            match s.solve() {
                Ok(x) => assert!(s.satisfied_by(&x)),
                Err(_) => {
                    // No point satisfies an inconsistent system.
                    assert!((0..1u32 << 10).all(|w| {
                        let p = BitSet::from_indices(10, (0..10).filter(|b| (w >> b) & 1 == 1));
                        !s.satisfied_by(&p)
                    }));
                }
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let s = LinearSystem::from_equations(
            5,
            [
                Equation::new(LinearForm::from_vars(5, [0, 4]), true),
                Equation::new(LinearForm::from_vars(5, [2]), false),
            ],
        );
        let back = LinearSystem::from_text(5, &s.to_text()).unwrap();
        assert_eq!(back, s);
        assert!(LinearSystem::from_text(5, "0101 1\n").is_err());
        assert!(LinearSystem::from_text(5, "01012 1\n").is_err());
    }
}
