//! BP on an arbitrary bipartite graph given by adjacency lists.

use super::{pos, TwoMin};
use crate::error::{Error, Result};
use crate::exact::LabeledTree;
use crate::graph::{BipartiteInstance, Label};

/// Bipartite graph with `o` (exactly one partner) and `m` (at least one)
/// vertices. Neighbor lists are sorted by vertex id.
#[derive(Clone, Debug)]
pub struct SparseBipartite {
    label: Vec<Label>,
    adj: Vec<Vec<(usize, f64)>>,
    /// `rev[v][i]` is the position of `v` in the list of its `i`-th neighbor.
    rev: Vec<Vec<usize>>,
}

impl SparseBipartite {
    pub fn new(label: Vec<Label>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let nv = label.len();
        let mut adj = vec![Vec::new(); nv];
        for &(u, v, w) in edges {
            if u >= nv || v >= nv {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range"
                )));
            }
            if label[u] == label[v] {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) joins two vertices with the same label"
                )));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) has length {w}"
                )));
            }
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
            if list.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(Error::InvalidParameter("parallel edges".into()));
            }
        }
        let rev = (0..nv)
            .map(|v| {
                adj[v]
                    .iter()
                    .map(|&(u, _)| {
                        adj[u]
                            .binary_search_by_key(&v, |&(x, _)| x)
                            .expect("symmetric lists")
                    })
                    .collect()
            })
            .collect();
        Ok(Self { label, adj, rev })
    }

    /// A-vertex `a` becomes vertex `a`, B-vertex `b` becomes `n + b`.
    pub fn from_instance(inst: &BipartiteInstance) -> Self {
        let (n, m) = (inst.n(), inst.m());
        let mut label = vec![Label::One; n];
        label.resize(n + m, Label::Many);
        let edges: Vec<_> = (0..n)
            .flat_map(|a| (0..m).map(move |b| (a, n + b, inst.weight(a, b))))
            .collect();
        Self::new(label, &edges).expect("complete bipartite graph is well formed")
    }

    pub fn from_tree(tree: &LabeledTree) -> Self {
        let label = (0..tree.len()).map(|v| tree.label(v)).collect();
        let edges: Vec<_> = (0..tree.len())
            .filter_map(|v| tree.parent(v).map(|p| (v, p, tree.edge_len(v))))
            .collect();
        Self::new(label, &edges).expect("labeled trees alternate")
    }

    pub fn vertex_count(&self) -> usize {
        self.label.len()
    }

    pub fn label(&self, v: usize) -> Label {
        self.label[v]
    }

    /// `(neighbor, length)` pairs sorted by neighbor.
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    fn slot(&self, v: usize, w: usize) -> Option<usize> {
        self.adj[v].binary_search_by_key(&w, |&(x, _)| x).ok()
    }

    /// Length of edge `{v, w}`, if present.
    pub fn edge_len(&self, v: usize, w: usize) -> Option<f64> {
        self.slot(v, w).map(|i| self.adj[v][i].1)
    }
}

/// Message iterate on a [`SparseBipartite`]: `out[v][i]` is sent by `v`
/// toward its `i`-th neighbor.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMessages {
    k: usize,
    out: Vec<Vec<f64>>,
}

impl SparseMessages {
    pub fn zeros(g: &SparseBipartite) -> Self {
        Self {
            k: 0,
            out: g.adj.iter().map(|l| vec![0.0; l.len()]).collect(),
        }
    }

    /// Iterate `k` reached from zero messages.
    pub fn run(g: &SparseBipartite, k: usize) -> Self {
        let mut s = Self::zeros(g);
        for _ in 0..k {
            s = s.step(g);
        }
        s
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Message sent by `v` toward `w`; `None` when they are not adjacent.
    pub fn sent(&self, g: &SparseBipartite, v: usize, w: usize) -> Option<f64> {
        g.slot(v, w).map(|i| self.out[v][i])
    }

    /// `len(v, u) - X(u -> v)` for each neighbor `u` of `v`.
    fn margins<'a>(&'a self, g: &'a SparseBipartite, v: usize) -> impl Iterator<Item = f64> + 'a {
        g.adj[v]
            .iter()
            .zip(&g.rev[v])
            .map(move |(&(u, len), &j)| len - self.out[u][j])
    }

    pub fn step(&self, g: &SparseBipartite) -> Self {
        let out = (0..g.vertex_count())
            .map(|v| {
                let mut t = TwoMin::EMPTY;
                for (i, d) in self.margins(g, v).enumerate() {
                    t.push(i, d);
                }
                (0..g.adj[v].len())
                    .map(|i| match g.label[v] {
                        Label::One => t.excluding(i),
                        Label::Many => pos(t.excluding(i)),
                    })
                    .collect()
            })
            .collect();
        Self { k: self.k + 1, out }
    }

    /// Neighbors chosen by each vertex: the argmin for `o`, every strictly
    /// negative margin (else the argmin) for `m`. Isolated vertices choose
    /// nothing.
    pub fn decide(&self, g: &SparseBipartite) -> Vec<Vec<usize>> {
        (0..g.vertex_count())
            .map(|v| {
                let mut t = TwoMin::EMPTY;
                let mut negative = Vec::new();
                for (i, d) in self.margins(g, v).enumerate() {
                    t.push(i, d);
                    if d < 0.0 {
                        negative.push(g.adj[v][i].0);
                    }
                }
                if g.adj[v].is_empty() {
                    Vec::new()
                } else if g.label[v] == Label::Many && !negative.is_empty() {
                    negative
                } else {
                    vec![g.adj[v][t.arg1].0]
                }
            })
            .collect()
    }
}
