//! DIMACS CNF text, a JSON sidecar for clause tags, and solver result lines.
//!
//! Formulas written here carry their provenance in comment lines:
//!
//! ```text
//! c bclique encoding=block n=2 k=2 p=0 seed=1
//! c varmap columns=2 bits=1 var(i,a)=(i-1)*bits+a, i and a 1-based, a=1 most significant
//! p cnf 2 4
//! ```

use std::fmt::Write as _;

use super::{ClauseTag, CnfError, CnfFormula, Encoding, FormulaMeta, Lit, VarMap};

/// Render `f` as DIMACS, with the metadata comments first. `extra` lines are
/// emitted as further comments.
pub fn to_dimacs(f: &CnfFormula, extra: &[String]) -> String {
    let mut out = String::new();
    let m = &f.meta;
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    writeln!(
        out,
        "c bclique encoding={} n={} k={} p={} seed={}",
        m.encoding.name(),
        m.n,
        m.k,
        opt(m.p.map(|p| p.to_string())),
        opt(m.seed.map(|s| s.to_string())),
    )
    .unwrap();
    writeln!(
        out,
        "c varmap columns={} bits={} var(i,a)=(i-1)*bits+a, i and a 1-based, a=1 most significant",
        f.var_map.columns, f.var_map.bits
    )
    .unwrap();
    for line in extra {
        writeln!(out, "c {line}").unwrap();
    }
    writeln!(out, "p cnf {} {}", f.num_vars, f.clauses.len()).unwrap();
    for c in &f.clauses {
        for l in c {
            write!(out, "{l} ").unwrap();
        }
        out.push_str("0\n");
    }
    out
}

fn parse_meta(body: &str, meta: &mut FormulaMeta) {
    for kv in body.split_whitespace() {
        let Some((key, val)) = kv.split_once('=') else {
            continue;
        };
        match key {
            "encoding" => {
                meta.encoding = match val {
                    "binary" => Encoding::Binary,
                    "block" => Encoding::Block,
                    _ => Encoding::Other,
                }
            }
            "n" => meta.n = val.parse().unwrap_or(meta.n),
            "k" => meta.k = val.parse().unwrap_or(meta.k),
            "p" => meta.p = val.parse().ok(),
            "seed" => meta.seed = val.parse().ok(),
            _ => {}
        }
    }
}

fn parse_varmap(body: &str) -> Option<VarMap> {
    let mut columns = None;
    let mut bits = None;
    for kv in body.split_whitespace() {
        match kv.split_once('=') {
            Some(("columns", v)) => columns = v.parse().ok(),
            Some(("bits", v)) => bits = v.parse().ok(),
            _ => {}
        }
    }
    Some(VarMap {
        columns: columns?,
        bits: bits?,
    })
}

/// Parse DIMACS CNF. Metadata comments are honoured when present; otherwise
/// the formula gets one column holding every variable. Tags are `Plain`.
pub fn from_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let err = |line: usize, reason: &str| CnfError::Dimacs {
        line,
        reason: reason.to_string(),
    };
    let mut meta = FormulaMeta {
        encoding: Encoding::Other,
        n: 0,
        k: 0,
        p: None,
        seed: None,
    };
    let mut var_map = None;
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut cur: Vec<Lit> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if let Some(body) = t.strip_prefix('c') {
            let body = body.trim_start();
            if let Some(rest) = body.strip_prefix("bclique ") {
                parse_meta(rest, &mut meta);
            } else if let Some(rest) = body.strip_prefix("varmap ") {
                var_map = parse_varmap(rest);
            }
            continue;
        }
        if let Some(rest) = t.strip_prefix("p ") {
            if header.is_some() {
                return Err(err(lineno, "second problem line"));
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 || parts[0] != "cnf" {
                return Err(err(lineno, "expected `p cnf <vars> <clauses>`"));
            }
            let v = parts[1].parse().map_err(|_| err(lineno, "bad variable count"))?;
            let c = parts[2].parse().map_err(|_| err(lineno, "bad clause count"))?;
            header = Some((v, c));
            continue;
        }
        let Some((nv, _)) = header else {
            return Err(err(lineno, "clause before problem line"));
        };
        for tok in t.split_whitespace() {
            let l: Lit = tok.parse().map_err(|_| err(lineno, "bad literal"))?;
            if l == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else {
                if l.unsigned_abs() as usize > nv {
                    return Err(err(lineno, "literal exceeds variable count"));
                }
                cur.push(l);
            }
        }
    }
    let Some((num_vars, num_clauses)) = header else {
        return Err(err(0, "missing problem line"));
    };
    if !cur.is_empty() {
        return Err(err(text.lines().count(), "unterminated clause"));
    }
    if clauses.len() != num_clauses {
        return Err(err(0, "clause count does not match header"));
    }
    let var_map = match var_map {
        Some(m) if m.num_vars() == num_vars => m,
        Some(_) => return Err(err(0, "varmap does not match variable count")),
        None => VarMap {
            columns: 1,
            bits: num_vars,
        },
    };
    Ok(CnfFormula {
        num_vars,
        tags: vec![ClauseTag::Plain; clauses.len()],
        clauses,
        var_map,
        meta,
    })
}

/// Clause tags as JSON, one entry per clause.
pub fn tags_json(f: &CnfFormula) -> String {
    serde_json::to_string(&f.tags).expect("tags serialize")
}

pub fn attach_tags(f: &mut CnfFormula, json: &str) -> Result<(), CnfError> {
    let tags: Vec<ClauseTag> = serde_json::from_str(json).map_err(|e| CnfError::Dimacs {
        line: e.line(),
        reason: e.to_string(),
    })?;
    if tags.len() != f.clauses.len() {
        return Err(CnfError::Dimacs {
            line: 0,
            reason: "tag count does not match clause count".into(),
        });
    }
    f.tags = tags;
    Ok(())
}

/// Outcome reported by an external solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverResult {
    Sat(Vec<Lit>),
    Unsat,
    Unknown,
}

/// Parse `s SATISFIABLE` / `s UNSATISFIABLE` (or bare `SAT` / `UNSAT`) and any
/// `v` model lines.
pub fn parse_solver_result(text: &str) -> SolverResult {
    let mut status = None;
    let mut model = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        let body = t.strip_prefix("s ").unwrap_or(t).trim();
        match body {
            "SATISFIABLE" | "SAT" => status = Some(true),
            "UNSATISFIABLE" | "UNSAT" => status = Some(false),
            _ => {}
        }
        if let Some(vals) = t.strip_prefix("v ") {
            model.extend(vals.split_whitespace().filter_map(|x| x.parse::<Lit>().ok()).filter(|&l| l != 0));
        }
    }
    match status {
        Some(true) => SolverResult::Sat(model),
        Some(false) => SolverResult::Unsat,
        None => SolverResult::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::encode_block_clique;
    use crate::graph::BlockGraph;
    use proptest::prelude::*;

    #[test]
    fn empty_formula_header() {
        let f = encode_block_clique(&BlockGraph::complete(2, 2).unwrap());
        let text = to_dimacs(&f, &[]);
        assert!(text.ends_with("p cnf 2 0\n"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('c')).count(), 1);
    }

    #[test]
    fn edgeless_block_formula() {
        let f = encode_block_clique(&BlockGraph::empty(2, 2).unwrap());
        let text = to_dimacs(&f, &[]);
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('c')).collect();
        assert_eq!(body, ["p cnf 2 4", "1 2 0", "1 -2 0", "-1 2 0", "-1 -2 0"]);
        let back = from_dimacs(&text).unwrap();
        assert_eq!(back.var_map, f.var_map);
        assert_eq!(back.meta.encoding, Encoding::Block);
    }

    #[test]
    fn tags_sidecar_round_trip() {
        let f = encode_block_clique(&BlockGraph::sample(4, 0.5, 3, 2).unwrap());
        let mut back = from_dimacs(&to_dimacs(&f, &[])).unwrap();
        attach_tags(&mut back, &tags_json(&f)).unwrap();
        assert_eq!(back.tags, f.tags);
    }

    #[test]
    fn malformed_inputs() {
        assert!(from_dimacs("1 2 0\n").is_err());
        assert!(from_dimacs("p cnf 2 1\n1 3 0\n").is_err());
        assert!(from_dimacs("p cnf 2 1\n1 2\n").is_err());
        assert!(from_dimacs("p cnf 2 2\n1 2 0\n").is_err());
        assert!(from_dimacs("p dnf 2 0\n").is_err());
    }

    #[test]
    fn solver_lines() {
        assert_eq!(parse_solver_result("c hi\ns UNSATISFIABLE\n"), SolverResult::Unsat);
        assert_eq!(
            parse_solver_result("s SATISFIABLE\nv 1 -2 0\n"),
            SolverResult::Sat(vec![1, -2])
        );
        assert_eq!(parse_solver_result("SAT\n"), SolverResult::Sat(vec![]));
        assert_eq!(parse_solver_result(""), SolverResult::Unknown);
    }

    fn arb_formula() -> impl Strategy<Value = (usize, Vec<Vec<Lit>>)> {
        (1usize..12).prop_flat_map(|nv| {
            let lit = (1..=nv as Lit, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v });
            (Just(nv), prop::collection::vec(prop::collection::vec(lit, 0..6), 0..20))
        })
    }

    proptest! {
        #[test]
        fn round_trip(spec in arb_formula()) {
            let (nv, clauses) = spec;
            let f = CnfFormula {
                num_vars: nv,
                tags: vec![ClauseTag::Plain; clauses.len()],
                clauses,
                var_map: VarMap { columns: 1, bits: nv },
                meta: FormulaMeta { encoding: Encoding::Other, n: 0, k: 0, p: None, seed: None },
            };
            let back = from_dimacs(&to_dimacs(&f, &["extra".into()])).unwrap();
            prop_assert_eq!(back.clauses, f.clauses);
            prop_assert_eq!(back.num_vars, nv);
        }
    }
}
