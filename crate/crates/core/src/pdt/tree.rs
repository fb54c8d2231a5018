use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitSet;
use crate::f2::{Equation, Layout, LinearForm};
use crate::graph::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LeafLabel {
    Pair(VertexId, VertexId),
    /// Leaf of a truncated tree.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PdtNode {
    Leaf(LeafLabel),
    /// Go to `children[b]` when the query evaluates to `b`.
    Query { form: LinearForm, children: [usize; 2] },
}

/// A parity decision tree stored as a node arena; node 0 is the root and
/// nodes are in preorder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityDecisionTree {
    pub layout: Layout,
    pub nodes: Vec<PdtNode>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("parse error at byte {pos}: {reason}")]
    Parse { pos: usize, reason: String },
}

impl ParityDecisionTree {
    pub fn leaf(layout: Layout, label: LeafLabel) -> Self {
        Self {
            layout,
            nodes: vec![PdtNode::Leaf(label)],
        }
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        matches!(self.nodes[v], PdtNode::Leaf(_))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&v| self.is_leaf(v)).collect()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &ParityDecisionTree, v: usize) -> usize {
            match &t.nodes[v] {
                PdtNode::Leaf(_) => 0,
                PdtNode::Query { children, .. } => 1 + go(t, children[0]).max(go(t, children[1])),
            }
        }
        go(self, 0)
    }

    /// Leaf reached on input `x`.
    pub fn run(&self, x: &BitSet) -> usize {
        let mut v = 0;
        while let PdtNode::Query { form, children } = &self.nodes[v] {
            v = children[form.eval(x) as usize];
        }
        v
    }

    /// Parity constraints `(query = branch)` on the root path to `target`, or
    /// `None` if `target` is not in the tree.
    pub fn path_constraints(&self, target: usize) -> Option<Vec<Equation>> {
        fn go(t: &ParityDecisionTree, v: usize, target: usize, acc: &mut Vec<Equation>) -> bool {
            if v == target {
                return true;
            }
            if let PdtNode::Query { form, children } = &t.nodes[v] {
                for b in [false, true] {
                    acc.push(Equation::new(form.clone(), b));
                    if go(t, children[b as usize], target, acc) {
                        return true;
                    }
                    acc.pop();
                }
            }
            false
        }
        let mut acc = Vec::new();
        go(self, 0, target, &mut acc).then_some(acc)
    }

    /// Complete tree of the given depth whose queries each mention between 1 and
    /// `max_vars` random variables of the `allowed` blocks; leaves are undetermined.
    pub fn random<R: Rng>(layout: Layout, depth: usize, allowed: &BitSet, max_vars: usize, rng: &mut R) -> Self {
        let vars: Vec<usize> = allowed.iter().flat_map(|i| layout.block_vars(i)).collect();
        assert!(!vars.is_empty() || depth == 0, "no variables to query");
        let mut t = Self {
            layout,
            nodes: Vec::new(),
        };
        fn build<R: Rng>(t: &mut ParityDecisionTree, d: usize, vars: &[usize], max_vars: usize, rng: &mut R) -> usize {
            let id = t.nodes.len();
            if d == 0 {
                t.nodes.push(PdtNode::Leaf(LeafLabel::Undetermined));
                return id;
            }
            let dims = t.layout.dims();
            let form = loop {
                let m = rng.gen_range(1..=max_vars.max(1));
                let f = LinearForm::from_vars(dims, (0..m).map(|_| vars[rng.gen_range(0..vars.len())]));
                if !f.is_zero() {
                    break f;
                }
            };
            t.nodes.push(PdtNode::Query {
                form,
                children: [0, 0],
            });
            let a = build(t, d - 1, vars, max_vars, rng);
            let b = build(t, d - 1, vars, max_vars, rng);
            if let PdtNode::Query { children, .. } = &mut t.nodes[id] {
                *children = [a, b];
            }
            id
        }
        build(&mut t, depth, &vars, max_vars, rng);
        t
    }

    /// Nested text: `(q <bits> <child0> <child1>)`, `(leaf b:i b:i)` or `(leaf ?)`.
    pub fn to_text(&self) -> String {
        fn go(t: &ParityDecisionTree, v: usize, out: &mut String) {
            match &t.nodes[v] {
                PdtNode::Leaf(LeafLabel::Undetermined) => out.push_str("(leaf ?)"),
                PdtNode::Leaf(LeafLabel::Pair(u, w)) => {
                    write!(out, "(leaf {}:{} {}:{})", u.block, u.index, w.block, w.index).unwrap()
                }
                PdtNode::Query { form, children } => {
                    write!(out, "(q {} ", form.to_bitstring()).unwrap();
                    go(t, children[0], out);
                    out.push(' ');
                    go(t, children[1], out);
                    out.push(')');
                }
            }
        }
        let mut out = String::new();
        go(self, 0, &mut out);
        out
    }

    pub fn from_text(layout: Layout, text: &str) -> Result<Self, TreeError> {
        let toks = tokenize(text);
        let mut t = Self {
            layout,
            nodes: Vec::new(),
        };
        let mut pos = 0;
        parse_node(&toks, &mut pos, &mut t)?;
        if pos != toks.len() {
            return Err(perr(toks.get(pos).map_or(text.len(), |x| x.0), "trailing input"));
        }
        Ok(t)
    }
}

fn tokenize(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if !cur.is_empty() {
                out.push((start, std::mem::take(&mut cur)));
            }
            if !c.is_whitespace() {
                out.push((i, c.to_string()));
            }
        } else {
            if cur.is_empty() {
                start = i;
            }
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push((start, cur));
    }
    out
}

fn perr(pos: usize, reason: &str) -> TreeError {
    TreeError::Parse {
        pos,
        reason: reason.to_string(),
    }
}

fn expect(toks: &[(usize, String)], pos: &mut usize, want: &str) -> Result<(), TreeError> {
    match toks.get(*pos) {
        Some((_, s)) if s == want => {
            *pos += 1;
            Ok(())
        }
        Some((p, s)) => Err(perr(*p, &format!("expected `{want}`, found `{s}`"))),
        None => Err(perr(usize::MAX, &format!("expected `{want}`, found end of input"))),
    }
}

fn parse_vertex(tok: Option<&(usize, String)>) -> Result<VertexId, TreeError> {
    let (p, s) = tok.ok_or_else(|| perr(usize::MAX, "missing vertex"))?;
    let (b, i) = s.split_once(':').ok_or_else(|| perr(*p, "vertex must be block:index"))?;
    match (b.parse(), i.parse()) {
        (Ok(b), Ok(i)) => Ok(VertexId::new(b, i)),
        _ => Err(perr(*p, "vertex must be block:index")),
    }
}

fn parse_node(toks: &[(usize, String)], pos: &mut usize, t: &mut ParityDecisionTree) -> Result<usize, TreeError> {
    expect(toks, pos, "(")?;
    let id = t.nodes.len();
    let head = toks.get(*pos).ok_or_else(|| perr(usize::MAX, "unexpected end"))?;
    *pos += 1;
    match head.1.as_str() {
        "leaf" => {
            if toks.get(*pos).is_some_and(|x| x.1 == "?") {
                *pos += 1;
                t.nodes.push(PdtNode::Leaf(LeafLabel::Undetermined));
            } else {
                let u = parse_vertex(toks.get(*pos))?;
                let v = parse_vertex(toks.get(*pos + 1))?;
                *pos += 2;
                t.nodes.push(PdtNode::Leaf(LeafLabel::Pair(u, v)));
            }
        }
        "q" => {
            let (p, bits) = toks.get(*pos).ok_or_else(|| perr(usize::MAX, "missing query"))?;
            let form = LinearForm::from_bitstring(bits)
                .filter(|f| f.dims() == t.layout.dims())
                .ok_or_else(|| perr(*p, "query must be a 0/1 string of the layout's length"))?;
            *pos += 1;
            t.nodes.push(PdtNode::Query {
                form,
                children: [0, 0],
            });
            let a = parse_node(toks, pos, t)?;
            let b = parse_node(toks, pos, t)?;
            if let PdtNode::Query { children, .. } = &mut t.nodes[id] {
                *children = [a, b];
            }
        }
        other => return Err(perr(head.0, &format!("unknown node kind `{other}`"))),
    }
    expect(toks, pos, ")")?;
    Ok(id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn depth_zero_tree() {
        let l = Layout::new(2, 2);
        let t = ParityDecisionTree::leaf(l, LeafLabel::Undetermined);
        assert_eq!(t.depth(), 0);
        assert_eq!(t.run(&BitSet::new(4)), 0);
    }

    #[test]
    fn single_query_goes_right_on_one() {
        let l = Layout::new(2, 2);
        let t = ParityDecisionTree::from_text(l, "(q 1000 (leaf ?) (leaf 0:1 1:2))").unwrap();
        assert_eq!(t.run(&BitSet::from_indices(4, [0])), 2);
        assert_eq!(t.run(&BitSet::new(4)), 1);
    }

    #[test]
    fn random_trees_match_naive_evaluation() {
        let l = Layout::new(3, 3);
        let mut rng = stream(5, 0);
        for _ in 0..50 {
            let t = ParityDecisionTree::random(l, 5, &BitSet::full(3), 3, &mut rng);
            assert_eq!(t.depth(), 5);
            for _ in 0..20 {
                let x = BitSet::from_indices(9, (0..9).filter(|_| rng.gen_bool(0.5)));
                // Walk by explicit parity sums over the stored coefficient string.
                let mut v = 0;
                while let PdtNode::Query { form, children } = &t.nodes[v] {
                    let s = form.to_bitstring();
                    let parity = s.chars().enumerate().filter(|(i, c)| *c == '1' && x.contains(*i)).count() % 2;
                    v = children[parity];
                }
                assert_eq!(t.run(&x), v);
                let path = t.path_constraints(v).unwrap();
                assert!(path.iter().all(|e| e.holds(&x)));
            }
        }
    }

    #[test]
    fn text_round_trip_and_errors() {
        let l = Layout::new(2, 2);
        let mut rng = stream(6, 0);
        let t = ParityDecisionTree::random(l, 3, &BitSet::full(2), 2, &mut rng);
        assert_eq!(ParityDecisionTree::from_text(l, &t.to_text()).unwrap(), t);
        assert!(ParityDecisionTree::from_text(l, "(q 10 (leaf ?) (leaf ?))").is_err());
        assert!(ParityDecisionTree::from_text(l, "(leaf ?) x").is_err());
        assert!(ParityDecisionTree::from_text(l, "(node)").is_err());
    }
}
