use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitSet;

/// `{(x, y) : a[x] <= b[y]}` over `[0, a.len()) × [0, b.len())`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangle {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
}

impl Triangle {
    pub fn new(a: Vec<i64>, b: Vec<i64>) -> Self {
        Self { a, b }
    }

    pub fn full(nx: usize, ny: usize) -> Self {
        Self::new(vec![0; nx], vec![0; ny])
    }

    pub fn empty(nx: usize, ny: usize) -> Self {
        Self::new(vec![1; nx], vec![0; ny])
    }

    pub fn nx(&self) -> usize {
        self.a.len()
    }

    pub fn ny(&self) -> usize {
        self.b.len()
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.a[x] <= self.b[y]
    }

    /// `T^x` as a set of `y`.
    pub fn slice_x(&self, x: usize) -> BitSet {
        BitSet::from_indices(self.ny(), (0..self.ny()).filter(|&y| self.contains(x, y)))
    }

    /// `T^y` as a set of `x`.
    pub fn slice_y(&self, y: usize) -> BitSet {
        BitSet::from_indices(self.nx(), (0..self.nx()).filter(|&x| self.contains(x, y)))
    }

    pub fn count(&self) -> usize {
        let mut b = self.b.clone();
        b.sort_unstable();
        self.a.iter().map(|&ax| b.len() - b.partition_point(|&by| by < ax)).sum()
    }

    pub fn is_empty(&self) -> bool {
        match (self.a.iter().min(), self.b.iter().max()) {
            (Some(a), Some(b)) => a > b,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleNode {
    pub tri: Triangle,
    /// At most two.
    pub children: Vec<usize>,
    /// Output of a leaf; `None` is allowed only for empty leaves.
    pub output: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleDag {
    pub nodes: Vec<TriangleNode>,
    pub root: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DagError {
    #[error("node {0} has fan-out above 2")]
    FanOut(usize),
    #[error("node {0} is reachable from itself")]
    Cycle(usize),
    #[error("root does not cover ({x}, {y})")]
    Root { x: usize, y: usize },
    #[error("node {node}: ({x}, {y}) is not covered by its children")]
    Cover { node: usize, x: usize, y: usize },
    #[error("leaf {node}: ({x}, {y}) is not a solution for its output")]
    Leaf { node: usize, x: usize, y: usize },
    #[error("leaf {0} has no output but a nonempty shape")]
    NoOutput(usize),
    #[error("node {0}: {1}")]
    Other(usize, String),
}

/// Nodes reachable from `root`, each after all its parents.
pub(crate) fn topological(children: &[Vec<usize>], root: usize) -> Result<Vec<usize>, DagError> {
    // 0 unseen, 1 on stack, 2 done
    let mut state = vec![0u8; children.len()];
    let mut post = Vec::new();
    let mut stack = vec![(root, 0usize)];
    state[root] = 1;
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        if let Some(&c) = children[v].get(*next) {
            *next += 1;
            match state[c] {
                0 => {
                    state[c] = 1;
                    stack.push((c, 0));
                }
                1 => return Err(DagError::Cycle(c)),
                _ => {}
            }
        } else {
            state[v] = 2;
            post.push(v);
            stack.pop();
        }
    }
    post.reverse();
    Ok(post)
}

impl TriangleDag {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        self.nodes.iter().map(|n| n.children.clone()).collect()
    }

    /// Reachable nodes, parents first.
    pub fn topological_order(&self) -> Result<Vec<usize>, DagError> {
        topological(&self.children(), self.root)
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> Result<usize, DagError> {
        let order = self.topological_order()?;
        let mut d = vec![0usize; self.nodes.len()];
        for &v in order.iter().rev() {
            d[v] = self.nodes[v].children.iter().map(|&c| d[c] + 1).max().unwrap_or(0);
        }
        Ok(d[self.root])
    }

    /// Checks the shape-DAG conditions by enumerating the domain. `solves(o, x, y)`
    /// tells whether output `o` is correct on `(x, y)`.
    pub fn validate(&self, solves: impl Fn(usize, usize, usize) -> bool) -> Result<(), DagError> {
        self.topological_order()?;
        let root = &self.nodes[self.root].tri;
        let (nx, ny) = (root.nx(), root.ny());
        for x in 0..nx {
            for y in 0..ny {
                if !root.contains(x, y) {
                    return Err(DagError::Root { x, y });
                }
            }
        }
        for (v, node) in self.nodes.iter().enumerate() {
            if node.children.len() > 2 {
                return Err(DagError::FanOut(v));
            }
            if node.tri.nx() != nx || node.tri.ny() != ny {
                return Err(DagError::Other(v, "triangle over a different domain".into()));
            }
            for x in 0..nx {
                for y in (0..ny).filter(|&y| node.tri.contains(x, y)) {
                    if node.children.is_empty() {
                        match node.output {
                            None => return Err(DagError::NoOutput(v)),
                            Some(o) if !solves(o, x, y) => return Err(DagError::Leaf { node: v, x, y }),
                            Some(_) => {}
                        }
                    } else if !node.children.iter().any(|&c| self.nodes[c].tri.contains(x, y)) {
                        return Err(DagError::Cover { node: v, x, y });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("dag serializes")
    }
}
