//! Line formats:
//!
//! ```text
//! cp <constant> <coeff>... axiom <idx>
//! cp <constant> <coeff>... from <j> <k>
//! rlin [ <bits>=<b> ... ] axiom <idx>
//! rlin [ <bits>=<b> ... ] res <j> <k> <pivot bits>
//! rlin [ <bits>=<b> ... ] weaken <j>
//! ```
//!
//! Coefficients may be fractions such as `-3/2`. Blank lines and `#` comments
//! are skipped; the number of variables is read off the lines.

use super::cp::{CpJust, CpLine, CpProof, Ineq, Q};
use super::resplus::{LinearClause, ResPlusProof, RlinJust, RlinLine};
use super::ProofError;
use crate::f2::{Equation, LinearForm};

fn parse_err(line: usize, reason: impl Into<String>) -> ProofError {
    ProofError::Parse {
        line,
        reason: reason.into(),
    }
}

fn content(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then(|| (i + 1, l.split_whitespace().collect()))
    })
}

fn num<T: std::str::FromStr>(line: usize, tok: Option<&&str>) -> Result<T, ProofError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(line, format!("expected a number, got {:?}", tok.copied().unwrap_or(""))))
}

fn agree(line: usize, n: &mut Option<usize>, got: usize) -> Result<(), ProofError> {
    match *n {
        Some(m) if m != got => Err(parse_err(line, format!("{got} variables where earlier lines have {m}"))),
        _ => {
            *n = Some(got);
            Ok(())
        }
    }
}

impl CpProof {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str("cp ");
            out.push_str(&line.ineq.constant.to_string());
            for c in &line.ineq.coeffs {
                out.push(' ');
                out.push_str(&c.to_string());
            }
            match line.just {
                CpJust::Axiom(a) => out.push_str(&format!(" axiom {a}\n")),
                CpJust::From(j, k) => out.push_str(&format!(" from {j} {k}\n")),
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ProofError> {
        let mut n = None;
        let mut lines = Vec::new();
        for (ln, toks) in content(text) {
            if toks[0] != "cp" {
                return Err(parse_err(ln, "expected `cp`"));
            }
            let kw = toks
                .iter()
                .position(|t| *t == "axiom" || *t == "from")
                .ok_or_else(|| parse_err(ln, "missing justification"))?;
            if kw < 2 {
                return Err(parse_err(ln, "missing constant"));
            }
            let constant: Q = num(ln, toks.get(1))?;
            let coeffs = (2..kw).map(|t| num::<Q>(ln, toks.get(t))).collect::<Result<Vec<_>, _>>()?;
            agree(ln, &mut n, coeffs.len())?;
            let just = match (toks[kw], toks.len() - kw) {
                ("axiom", 2) => CpJust::Axiom(num(ln, toks.get(kw + 1))?),
                ("from", 3) => CpJust::From(num(ln, toks.get(kw + 1))?, num(ln, toks.get(kw + 2))?),
                _ => return Err(parse_err(ln, "malformed justification")),
            };
            lines.push(CpLine {
                ineq: Ineq::new(coeffs, constant),
                just,
            });
        }
        Ok(CpProof {
            num_vars: n.unwrap_or(0),
            lines,
        })
    }
}

impl ResPlusProof {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str("rlin [");
            for e in &line.clause.eqs {
                out.push_str(&format!(" {}={}", e.form.to_bitstring(), e.rhs as u8));
            }
            out.push_str(" ] ");
            match &line.just {
                RlinJust::Axiom(a) => out.push_str(&format!("axiom {a}\n")),
                RlinJust::Res { j, k, pivot } => out.push_str(&format!("res {j} {k} {}\n", pivot.to_bitstring())),
                RlinJust::Weaken(j) => out.push_str(&format!("weaken {j}\n")),
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ProofError> {
        let mut n = None;
        let mut parsed = Vec::new();
        for (ln, toks) in content(text) {
            if toks.first() != Some(&"rlin") || toks.get(1) != Some(&"[") {
                return Err(parse_err(ln, "expected `rlin [`"));
            }
            let close = toks
                .iter()
                .position(|t| *t == "]")
                .ok_or_else(|| parse_err(ln, "unclosed clause"))?;
            let mut eqs = Vec::new();
            for tok in &toks[2..close] {
                let (bits, rhs) = tok.split_once('=').ok_or_else(|| parse_err(ln, format!("bad equation {tok:?}")))?;
                let form = LinearForm::from_bitstring(bits).ok_or_else(|| parse_err(ln, format!("bad form {bits:?}")))?;
                let rhs = match rhs {
                    "0" => false,
                    "1" => true,
                    _ => return Err(parse_err(ln, format!("bad right-hand side {rhs:?}"))),
                };
                agree(ln, &mut n, form.dims())?;
                eqs.push(Equation::new(form, rhs));
            }
            let rest = &toks[close + 1..];
            let just = match rest {
                ["axiom", a] => RlinJust::Axiom(num(ln, Some(a))?),
                ["weaken", j] => RlinJust::Weaken(num(ln, Some(j))?),
                ["res", j, k, p] => {
                    let pivot = LinearForm::from_bitstring(p).ok_or_else(|| parse_err(ln, format!("bad pivot {p:?}")))?;
                    agree(ln, &mut n, pivot.dims())?;
                    RlinJust::Res {
                        j: num(ln, Some(j))?,
                        k: num(ln, Some(k))?,
                        pivot,
                    }
                }
                _ => return Err(parse_err(ln, "malformed justification")),
            };
            parsed.push((eqs, just));
        }
        let n = n.unwrap_or(0);
        let lines = parsed
            .into_iter()
            .map(|(eqs, just)| RlinLine {
                clause: LinearClause::new(n, eqs),
                just,
            })
            .collect();
        Ok(ResPlusProof { num_vars: n, lines })
    }
}
