use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CommError;
use crate::bits::BitSet;
use crate::bottleneck::Domain;
use crate::graph::{BlockGraph, VertexId};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Leaf {
        output: [VertexId; 2],
    },
    /// `table` is indexed by the speaker's input; child `b` is taken when the
    /// entry equals `b`.
    Internal {
        speaker: Speaker,
        table: BitSet,
        children: [usize; 2],
    },
}

#[derive(Debug, Clone)]
pub struct ProtocolNode {
    pub kind: NodeKind,
    pub xs: BitSet,
    pub ys: BitSet,
    pub depth: usize,
    pub parent: Option<usize>,
}

/// A deterministic protocol over `X × Y` with every node's rectangle cached.
/// Node 0 is the root.
#[derive(Debug, Clone)]
pub struct ProtocolTree {
    pub dom: Domain,
    nodes: Vec<ProtocolNode>,
}

/// Results of re-deriving the rectangles by running the protocol.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Audit {
    pub pairs: u64,
    pub rect_mismatches: usize,
    pub partition_violations: usize,
    pub fix_monotone_violations: usize,
}

impl Audit {
    pub fn ok(&self) -> bool {
        self.rect_mismatches == 0 && self.partition_violations == 0 && self.fix_monotone_violations == 0
    }
}

impl ProtocolTree {
    pub fn new(dom: Domain, kinds: Vec<NodeKind>) -> Result<Self, CommError> {
        if kinds.is_empty() {
            return Err(CommError::Malformed("no nodes".into()));
        }
        let size = dom.size();
        let mut slots: Vec<Option<ProtocolNode>> = vec![None; kinds.len()];
        let mut stack = vec![(0usize, BitSet::full(size), BitSet::full(size), 0usize, None)];
        while let Some((v, xs, ys, depth, parent)) = stack.pop() {
            if v >= kinds.len() {
                return Err(CommError::Malformed(format!("child {v} out of range")));
            }
            if slots[v].is_some() {
                return Err(CommError::Malformed(format!("node {v} is reached twice")));
            }
            match &kinds[v] {
                NodeKind::Leaf { output } => {
                    for u in output {
                        if u.block >= dom.k || u.index >= dom.n {
                            return Err(CommError::Malformed(format!("node {v} outputs a vertex outside the graph")));
                        }
                    }
                }
                NodeKind::Internal { speaker, table, children } => {
                    if table.len() != size {
                        return Err(CommError::Malformed(format!("node {v} has a table of length {}", table.len())));
                    }
                    for (b, &c) in children.iter().enumerate() {
                        let (cx, cy) = split(*speaker, table, &xs, &ys, b == 1);
                        stack.push((c, cx, cy, depth + 1, Some(v)));
                    }
                }
            }
            slots[v] = Some(ProtocolNode {
                kind: kinds[v].clone(),
                xs,
                ys,
                depth,
                parent,
            });
        }
        let nodes = slots
            .into_iter()
            .enumerate()
            .map(|(v, s)| s.ok_or_else(|| CommError::Malformed(format!("node {v} is unreachable"))))
            .collect::<Result<_, _>>()?;
        Ok(Self { dom, nodes })
    }

    pub fn nodes(&self) -> &[ProtocolNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&v| matches!(self.nodes[v].kind, NodeKind::Leaf { .. }))
            .collect()
    }

    /// Depth of the deepest leaf.
    pub fn cost(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn output(&self, v: usize) -> Option<[VertexId; 2]> {
        match self.nodes[v].kind {
            NodeKind::Leaf { output } => Some(output),
            NodeKind::Internal { .. } => None,
        }
    }

    /// Nodes visited on input `(x, y)`, root first.
    pub fn path(&self, x: usize, y: usize) -> Vec<usize> {
        let mut v = 0;
        let mut path = vec![0];
        while let NodeKind::Internal { speaker, table, children } = &self.nodes[v].kind {
            let z = match speaker {
                Speaker::Alice => x,
                Speaker::Bob => y,
            };
            v = children[table.contains(z) as usize];
            path.push(v);
        }
        path
    }

    /// The leaf reached on `(x, y)`.
    pub fn run(&self, x: usize, y: usize) -> usize {
        *self.path(x, y).last().expect("root")
    }

    /// Always outputs `output`.
    pub fn constant(dom: Domain, output: [VertexId; 2]) -> Result<Self, CommError> {
        Self::new(dom, vec![NodeKind::Leaf { output }])
    }

    /// Alice sends her halves of blocks `a` and `b` one bit at a time, then Bob
    /// sends his, and the leaf outputs the two selected vertices.
    pub fn baseline(dom: Domain, a: usize, b: usize) -> Result<Self, CommError> {
        if a == b || a >= dom.k || b >= dom.k {
            return Err(CommError::Malformed(format!("blocks {a}, {b} are not two distinct blocks")));
        }
        let coords: Vec<usize> = [a, b].iter().flat_map(|&i| i * dom.h..(i + 1) * dom.h).collect();
        let mut kinds = Vec::new();
        baseline_node(&dom, &coords, a, b, 0, 0, 0, &mut kinds);
        Self::new(dom, kinds)
    }

    /// A full tree of the given depth in which every node asks a random
    /// speaker for a coordinate not asked before on that path. Leaves output a
    /// random pair of blocks with the vertices spelled by the known bits
    /// (unknown bits read as 0).
    pub fn random_coordinate(dom: Domain, depth: usize, seed: u64) -> Result<Self, CommError> {
        let m = dom.k * dom.h;
        if depth > 2 * m {
            return Err(CommError::Malformed(format!("depth {depth} exceeds the {} input bits", 2 * m)));
        }
        if dom.k < 2 {
            return Err(CommError::Malformed("need at least two blocks".into()));
        }
        let mut rng = stream(seed, 0);
        let mut kinds = Vec::new();
        random_node(&dom, depth, [Vec::new(), Vec::new()], [0, 0], &mut rng, &mut kinds);
        Self::new(dom, kinds)
    }

    /// Checks by traversal that the inputs reaching each node are exactly its
    /// cached rectangle, that children split the parent along the speaker's
    /// side, and that fixed coordinates only grow along a path.
    pub fn audit(&self, budget: u64) -> Result<Audit, CommError> {
        let size = self.dom.size();
        let pairs = (size as u64) * (size as u64);
        if pairs > budget {
            return Err(CommError::TooLarge { pairs, budget });
        }
        let counts = (0..size)
            .into_par_iter()
            .map(|x| {
                let mut c = vec![0u64; self.nodes.len()];
                let mut bad = 0usize;
                for y in 0..size {
                    for v in self.path(x, y) {
                        c[v] += 1;
                        if !self.nodes[v].xs.contains(x) || !self.nodes[v].ys.contains(y) {
                            bad += 1;
                        }
                    }
                }
                (c, bad)
            })
            .reduce(
                || (vec![0u64; self.nodes.len()], 0),
                |(mut a, ba), (b, bb)| {
                    a.iter_mut().zip(b).for_each(|(s, t)| *s += t);
                    (a, ba + bb)
                },
            );
        let mut audit = Audit {
            pairs,
            rect_mismatches: counts.1,
            ..Audit::default()
        };
        let m = self.dom.k * self.dom.h;
        for (v, node) in self.nodes.iter().enumerate() {
            if counts.0[v] != (node.xs.count() * node.ys.count()) as u64 {
                audit.rect_mismatches += 1;
            }
            if let NodeKind::Internal { speaker, children, .. } = &node.kind {
                let [c0, c1] = children.map(|c| &self.nodes[c]);
                let (own, other) = match speaker {
                    Speaker::Alice => ((&node.xs, &c0.xs, &c1.xs), (&node.ys, &c0.ys, &c1.ys)),
                    Speaker::Bob => ((&node.ys, &c0.ys, &c1.ys), (&node.xs, &c0.xs, &c1.xs)),
                };
                let mut union = own.1.clone();
                union.union_with(own.2);
                if own.1.intersects(own.2) || &union != own.0 || other.1 != other.0 || other.2 != other.0 {
                    audit.partition_violations += 1;
                }
            }
            if let Some(p) = node.parent {
                let parent = &self.nodes[p];
                for (child, par) in [(&node.xs, &parent.xs), (&node.ys, &parent.ys)] {
                    if child.count() == 0 {
                        continue;
                    }
                    let cf = super::spread::fixed_coords(child, m);
                    let pf = super::spread::fixed_coords(par, m);
                    if !pf.iter().all(|c| cf.contains(c)) {
                        audit.fix_monotone_violations += 1;
                    }
                }
            }
        }
        Ok(audit)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<NodeJson> = self.nodes.iter().map(|n| NodeJson::from(&n.kind)).collect();
        serde_json::json!({ "n": self.dom.n, "k": self.dom.k, "nodes": nodes })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, CommError> {
        let doc: TreeJson = serde_json::from_value(value.clone()).map_err(|e| CommError::Malformed(e.to_string()))?;
        let dom = Domain::new(doc.n, doc.k).map_err(|e| CommError::Malformed(e.to_string()))?;
        let kinds = doc
            .nodes
            .into_iter()
            .enumerate()
            .map(|(v, n)| n.into_kind(dom.size()).map_err(|e| CommError::Malformed(format!("node {v}: {e}"))))
            .collect::<Result<_, _>>()?;
        Self::new(dom, kinds)
    }
}

fn split(speaker: Speaker, table: &BitSet, xs: &BitSet, ys: &BitSet, bit: bool) -> (BitSet, BitSet) {
    let restrict = |s: &BitSet| BitSet::from_indices(s.len(), s.iter().filter(|&z| table.contains(z) == bit));
    match speaker {
        Speaker::Alice => (restrict(xs), ys.clone()),
        Speaker::Bob => (xs.clone(), restrict(ys)),
    }
}

fn coordinate_table(dom: &Domain, c: usize) -> BitSet {
    BitSet::from_indices(dom.size(), (0..dom.size()).filter(|z| (z >> c) & 1 == 1))
}

/// Appends the subtree after Alice has sent `sent_x` (bits in order of
/// `coords`) and Bob `sent_y`; returns its index.
#[allow(clippy::too_many_arguments)]
fn baseline_node(
    dom: &Domain,
    coords: &[usize],
    a: usize,
    b: usize,
    step: usize,
    sent_x: usize,
    sent_y: usize,
    kinds: &mut Vec<NodeKind>,
) -> usize {
    let v = kinds.len();
    let t = coords.len();
    if step == 2 * t {
        let spell = |z: usize| coords.iter().enumerate().fold(0, |acc, (j, &c)| acc | (((z >> j) & 1) << c));
        let (x, y) = (spell(sent_x), spell(sent_y));
        kinds.push(NodeKind::Leaf {
            output: [dom.vertex(x, y, a), dom.vertex(x, y, b)],
        });
        return v;
    }
    let (speaker, c) = if step < t { (Speaker::Alice, coords[step]) } else { (Speaker::Bob, coords[step - t]) };
    kinds.push(NodeKind::Internal {
        speaker,
        table: coordinate_table(dom, c),
        children: [0, 0],
    });
    let mut children = [0; 2];
    for bit in 0..2 {
        let (sx, sy) = if step < t {
            (sent_x | bit << step, sent_y)
        } else {
            (sent_x, sent_y | bit << (step - t))
        };
        children[bit] = baseline_node(dom, coords, a, b, step + 1, sx, sy, kinds);
    }
    if let NodeKind::Internal { children: ch, .. } = &mut kinds[v] {
        *ch = children;
    }
    v
}

/// `asked[s]` lists coordinates asked of speaker `s`; `known[s]` holds their
/// answers at the same bit positions as in the input.
fn random_node<R: Rng>(
    dom: &Domain,
    depth: usize,
    asked: [Vec<usize>; 2],
    known: [usize; 2],
    rng: &mut R,
    kinds: &mut Vec<NodeKind>,
) -> usize {
    let v = kinds.len();
    let m = dom.k * dom.h;
    if depth == 0 {
        let a = rng.gen_range(0..dom.k);
        let b = (a + rng.gen_range(1..dom.k)) % dom.k;
        kinds.push(NodeKind::Leaf {
            output: [dom.vertex(known[0], known[1], a), dom.vertex(known[0], known[1], b)],
        });
        return v;
    }
    let open: Vec<(usize, usize)> = (0..2)
        .flat_map(|s| {
            let asked = &asked[s];
            (0..m).filter(move |c| !asked.contains(c)).map(move |c| (s, c))
        })
        .collect();
    let (s, c) = open[rng.gen_range(0..open.len())];
    let speaker = if s == 0 { Speaker::Alice } else { Speaker::Bob };
    kinds.push(NodeKind::Internal {
        speaker,
        table: coordinate_table(dom, c),
        children: [0, 0],
    });
    let mut children = [0; 2];
    for bit in 0..2 {
        let mut asked = asked.clone();
        asked[s].push(c);
        let mut known = known;
        known[s] |= bit << c;
        children[bit] = random_node(dom, depth - 1, asked, known, rng, kinds);
    }
    if let NodeKind::Internal { children: ch, .. } = &mut kinds[v] {
        *ch = children;
    }
    v
}

/// Whether `output` names the vertices selected by `(x, y)` in two distinct
/// blocks and they are not adjacent.
pub fn valid_output(dom: &Domain, g: &BlockGraph, output: [VertexId; 2], x: usize, y: usize) -> bool {
    let [u, v] = output;
    u.block != v.block && dom.vertex(x, y, u.block) == u && dom.vertex(x, y, v.block) == v && !g.has_edge(u, v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorMode {
    Exhaustive { budget: u64 },
    Sampled { trials: u64, seed: u64 },
}

pub const DEFAULT_PAIR_BUDGET: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorEstimate {
    pub error: f64,
    /// Standard error; 0 when exhaustive.
    pub se: f64,
    pub trials: u64,
    pub exhaustive: bool,
}

/// Probability over uniform `(x, y)` that the protocol's output is not a
/// valid non-edge among the selected vertices.
pub fn distributional_error(tree: &ProtocolTree, g: &BlockGraph, mode: ErrorMode) -> Result<ErrorEstimate, CommError> {
    let dom = tree.dom;
    if g.n() != dom.n || g.k() != dom.k {
        return Err(CommError::Malformed("graph and protocol disagree on n or k".into()));
    }
    let wrong = |x: usize, y: usize| {
        let out = tree.output(tree.run(x, y)).expect("leaf");
        !valid_output(&dom, g, out, x, y)
    };
    match mode {
        ErrorMode::Exhaustive { budget } => {
            let size = dom.size();
            let pairs = (size as u64) * (size as u64);
            if pairs > budget {
                return Err(CommError::TooLarge { pairs, budget });
            }
            let errors: u64 = (0..size)
                .into_par_iter()
                .map(|x| (0..size).filter(|&y| wrong(x, y)).count() as u64)
                .sum();
            Ok(ErrorEstimate {
                error: errors as f64 / pairs as f64,
                se: 0.0,
                trials: pairs,
                exhaustive: true,
            })
        }
        ErrorMode::Sampled { trials, seed } => {
            if trials == 0 {
                return Err(CommError::Malformed("zero trials".into()));
            }
            let mut rng = stream(seed, 0);
            let size = dom.size();
            let errors = (0..trials)
                .filter(|_| {
                    let (x, y) = (rng.gen_range(0..size), rng.gen_range(0..size));
                    wrong(x, y)
                })
                .count();
            let e = errors as f64 / trials as f64;
            Ok(ErrorEstimate {
                error: e,
                se: (e * (1.0 - e) / trials as f64).sqrt(),
                trials,
                exhaustive: false,
            })
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    n: usize,
    k: usize,
    nodes: Vec<NodeJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeJson {
    Leaf { output: [[usize; 2]; 2] },
    Internal { speaker: Speaker, table: String, children: [usize; 2] },
}

impl From<&NodeKind> for NodeJson {
    fn from(kind: &NodeKind) -> Self {
        match kind {
            NodeKind::Leaf { output } => NodeJson::Leaf {
                output: output.map(|u| [u.block, u.index]),
            },
            NodeKind::Internal { speaker, table, children } => NodeJson::Internal {
                speaker: *speaker,
                table: (0..table.len()).map(|z| if table.contains(z) { '1' } else { '0' }).collect(),
                children: *children,
            },
        }
    }
}

impl NodeJson {
    fn into_kind(self, size: usize) -> Result<NodeKind, String> {
        Ok(match self {
            NodeJson::Leaf { output } => NodeKind::Leaf {
                output: output.map(|[b, i]| VertexId::new(b, i)),
            },
            NodeJson::Internal { speaker, table, children } => {
                if table.len() != size {
                    return Err(format!("table has {} entries, expected {size}", table.len()));
                }
                let mut t = BitSet::new(size);
                for (z, ch) in table.chars().enumerate() {
                    match ch {
                        '0' => {}
                        '1' => {
                            t.insert(z);
                        }
                        _ => return Err(format!("table entry {ch:?}")),
                    }
                }
                NodeKind::Internal { speaker, table: t, children }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dom(n: usize, k: usize) -> Domain {
        Domain::new(n, k).unwrap()
    }

    /// Exact error from leaf rectangles: the output is valid exactly on the
    /// inputs of the leaf whose halves spell both output vertices.
    fn oracle_error(tree: &ProtocolTree, g: &BlockGraph) -> f64 {
        let d = tree.dom;
        let mut good = 0usize;
        for l in tree.leaves() {
            let [u, v] = tree.output(l).unwrap();
            if u.block == v.block || g.has_edge(u, v) {
                continue;
            }
            let node = &tree.nodes()[l];
            let fits = |z: usize, lo: bool| {
                [u, v].iter().all(|w| {
                    let half = if lo { w.index & (d.sigma() - 1) } else { w.index >> d.h };
                    d.half(z, w.block) == half
                })
            };
            let nx = node.xs.iter().filter(|&x| fits(x, false)).count();
            let ny = node.ys.iter().filter(|&y| fits(y, true)).count();
            good += nx * ny;
        }
        1.0 - good as f64 / (d.size() * d.size()) as f64
    }

    #[test]
    fn constant_protocol_on_edgeless_and_complete() {
        // n = 4, k = 2: x and y are one bit per block; (0,0) in both blocks
        // is selected only when x = y = 0.
        let d = dom(4, 2);
        let t = ProtocolTree::constant(d, [VertexId::new(0, 0), VertexId::new(1, 0)]).unwrap();
        let e = BlockGraph::empty(4, 2).unwrap();
        let c = BlockGraph::complete(4, 2).unwrap();
        let ex = ErrorMode::Exhaustive { budget: DEFAULT_PAIR_BUDGET };
        assert_eq!(distributional_error(&t, &e, ex).unwrap().error, 15.0 / 16.0);
        assert_eq!(distributional_error(&t, &c, ex).unwrap().error, 1.0);
        // the baseline always names the selected pair
        let b = ProtocolTree::baseline(d, 0, 1).unwrap();
        assert_eq!(distributional_error(&b, &e, ex).unwrap().error, 0.0);
        assert_eq!(distributional_error(&b, &c, ex).unwrap().error, 1.0);
    }

    #[test]
    fn baseline_shape() {
        let d = dom(16, 3);
        let t = ProtocolTree::baseline(d, 0, 2).unwrap();
        assert_eq!(t.cost(), 8);
        assert_eq!(t.leaves().len(), 256);
        assert!(t.audit(DEFAULT_PAIR_BUDGET).unwrap().ok());
        for l in t.leaves() {
            let n = &t.nodes()[l];
            assert_eq!(n.xs.count(), 4);
            assert_eq!(n.ys.count(), 4);
        }
    }

    #[test]
    fn baseline_error_matches_recount() {
        for seed in 0..10 {
            let g = BlockGraph::sample(4, 0.5, 2, seed).unwrap();
            let t = ProtocolTree::baseline(dom(4, 2), 0, 1).unwrap();
            let e = distributional_error(&t, &g, ErrorMode::Exhaustive { budget: 1 << 20 }).unwrap();
            assert!((e.error - oracle_error(&t, &g)).abs() < 1e-12);
            // each of the 16 vertex pairs is selected by 1/16 of inputs
            let edges = (0..4)
                .flat_map(|i| (0..4).map(move |j| (i, j)))
                .filter(|&(i, j)| g.has_edge(VertexId::new(0, i), VertexId::new(1, j)))
                .count();
            assert!((e.error - edges as f64 / 16.0).abs() < 1e-12);
            let s = distributional_error(&t, &g, ErrorMode::Sampled { trials: 20_000, seed }).unwrap();
            assert!((s.error - e.error).abs() <= 4.0 * s.se.max(1e-3));
        }
    }

    #[test]
    fn json_round_trip() {
        let t = ProtocolTree::random_coordinate(dom(16, 2), 3, 5).unwrap();
        let back = ProtocolTree::from_json(&t.to_json()).unwrap();
        assert_eq!(back.to_json(), t.to_json());
        assert!(ProtocolTree::from_json(&serde_json::json!({"n": 4, "k": 2, "nodes": []})).is_err());
    }

    #[test]
    fn malformed_trees_rejected() {
        let d = dom(4, 2);
        let leaf = NodeKind::Leaf {
            output: [VertexId::new(0, 0), VertexId::new(1, 0)],
        };
        let bad_table = NodeKind::Internal {
            speaker: Speaker::Alice,
            table: BitSet::new(3),
            children: [1, 2],
        };
        assert!(ProtocolTree::new(d, vec![bad_table, leaf.clone(), leaf.clone()]).is_err());
        let shared = NodeKind::Internal {
            speaker: Speaker::Bob,
            table: BitSet::new(4),
            children: [1, 1],
        };
        assert!(ProtocolTree::new(d, vec![shared, leaf.clone()]).is_err());
        assert!(ProtocolTree::new(d, vec![leaf.clone(), leaf]).is_err());
    }

    proptest! {
        #[test]
        fn random_protocols_pass_audit(seed in 0u64..1000, depth in 0usize..7) {
            let d = dom(16, 2);
            let t = ProtocolTree::random_coordinate(d, depth, seed).unwrap();
            prop_assert!(t.audit(DEFAULT_PAIR_BUDGET).unwrap().ok());
            let g = BlockGraph::sample(16, 0.5, 2, seed).unwrap();
            let e = distributional_error(&t, &g, ErrorMode::Exhaustive { budget: DEFAULT_PAIR_BUDGET }).unwrap();
            prop_assert!((e.error - oracle_error(&t, &g)).abs() < 1e-12);
        }
    }
}
