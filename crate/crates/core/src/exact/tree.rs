//! Minimum-cost many-to-one matching on a finite labeled tree.
//!
//! For each vertex `v` the DP tracks two costs over the subtree `T_v`:
//! `with` = optimum on `T_v` where `v` must satisfy its own degree
//! constraint using children only, and `without` = optimum on the forest
//! `T_v \ v`. Either may be infeasible.

use std::cmp::Ordering;
use std::ops::Add;

use crate::error::{Error, Result};
use crate::graph::Label;
use crate::rng::RngStream;

/// Matching cost with an explicit infeasible marker. `Infeasible` absorbs
/// under addition and loses every comparison against a finite cost.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cost {
    Finite(f64),
    Infeasible,
}

impl Cost {
    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Cost::Finite(c) => Some(c),
            Cost::Infeasible => None,
        }
    }

    /// Lesser of the two; `self` wins ties.
    pub fn min(self, other: Cost) -> Cost {
        if other.lt(self) {
            other
        } else {
            self
        }
    }

    fn lt(self, other: Cost) -> bool {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a < b,
            (Cost::Finite(_), Cost::Infeasible) => true,
            _ => false,
        }
    }

    /// `self - other` in the extended reals (`+inf` when only `self` is
    /// infeasible, `-inf` when only `other` is). `None` when both are.
    pub fn difference(self, other: Cost) -> Option<f64> {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => Some(a - b),
            (Cost::Infeasible, Cost::Finite(_)) => Some(f64::INFINITY),
            (Cost::Finite(_), Cost::Infeasible) => Some(f64::NEG_INFINITY),
            (Cost::Infeasible, Cost::Infeasible) => None,
        }
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infeasible,
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.partial_cmp(b),
            (Cost::Finite(_), Cost::Infeasible) => Some(Ordering::Less),
            (Cost::Infeasible, Cost::Finite(_)) => Some(Ordering::Greater),
            (Cost::Infeasible, Cost::Infeasible) => Some(Ordering::Equal),
        }
    }
}

impl std::iter::Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::Finite(0.0), |acc, c| acc + c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeDpValue {
    /// `C(T_v)`.
    pub with: Cost,
    /// `C(T_v \ v)`.
    pub without: Cost,
}

/// Rooted tree with `o`/`m` labels alternating along edges.
#[derive(Clone, Debug)]
pub struct LabeledTree {
    parent: Vec<Option<usize>>,
    label: Vec<Label>,
    /// Length of the edge to the parent; ignored for the root.
    edge_len: Vec<f64>,
    children: Vec<Vec<usize>>,
    root: usize,
}

impl LabeledTree {
    pub fn new(parent: Vec<Option<usize>>, label: Vec<Label>, edge_len: Vec<f64>) -> Result<Self> {
        let n = parent.len();
        if n == 0 || label.len() != n || edge_len.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "tree arrays must be nonempty and equal length: {} / {} / {}",
                n,
                label.len(),
                edge_len.len()
            )));
        }
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidParameter(format!(
                "tree needs exactly one root, found {}",
                roots.len()
            )));
        }
        let mut children = vec![Vec::new(); n];
        for v in 0..n {
            if let Some(p) = parent[v] {
                if p >= n || p == v {
                    return Err(Error::InvalidParameter(format!("bad parent {p} of {v}")));
                }
                if label[p] == label[v] {
                    return Err(Error::InvalidParameter(format!(
                        "labels must alternate on edge {p}-{v}"
                    )));
                }
                let len = edge_len[v];
                if !(len.is_finite() && len >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "edge length of {v} must be finite and >= 0"
                    )));
                }
                children[p].push(v);
            }
        }
        let tree = Self {
            parent,
            label,
            edge_len,
            children,
            root: roots[0],
        };
        if tree.preorder().len() != n {
            return Err(Error::InvalidParameter(
                "parent links contain a cycle".into(),
            ));
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn label(&self, v: usize) -> Label {
        self.label[v]
    }

    pub fn edge_len(&self, v: usize) -> f64 {
        self.edge_len[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Root first; every parent precedes its children.
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            if order.len() > self.len() {
                break;
            }
            stack.extend(self.children[v].iter().rev());
        }
        order
    }

    /// Random recursive tree: vertex `v` attaches to a uniform earlier
    /// vertex, edge lengths are Exp(1), the root label is a fair coin.
    pub fn random(rng: &mut RngStream, size: usize) -> Self {
        let root_label = if rng.bernoulli(0.5) {
            Label::One
        } else {
            Label::Many
        };
        let mut parent = vec![None];
        let mut label = vec![root_label];
        let mut edge = vec![0.0];
        for v in 1..size.max(1) {
            let p = rng.index(v);
            parent.push(Some(p));
            label.push(label[p].flip());
            edge.push(rng.exp1());
        }
        Self::new(parent, label, edge).expect("parents precede children and labels alternate")
    }

    /// Longest path, in edges.
    pub fn diameter(&self) -> usize {
        let mut height = vec![0usize; self.len()];
        let mut best = 0;
        for &v in self.preorder().iter().rev() {
            let mut top = [0usize; 2];
            for &c in &self.children[v] {
                let h = height[c] + 1;
                if h > top[0] {
                    top = [h, top[0]];
                } else if h > top[1] {
                    top[1] = h;
                }
            }
            height[v] = top[0];
            best = best.max(top[0] + top[1]);
        }
        best
    }
}

/// Best single child for an `o`-vertex: the one it matches.
fn one_choice(tree: &LabeledTree, v: usize, dp: &[TreeDpValue]) -> (Cost, Option<usize>) {
    let kids = tree.children(v);
    let blocked: Vec<usize> = kids
        .iter()
        .copied()
        .filter(|&u| !dp[u].with.is_finite())
        .collect();
    let through = |u: usize| Cost::Finite(tree.edge_len(u)) + dp[u].with.min(dp[u].without);
    match blocked.len() {
        0 => {
            // All children finite: pick u minimising len + min(with, without) - with.
            let mut best: Option<(f64, usize)> = None;
            for &u in kids {
                if let (Some(t), Some(w)) = (through(u).value(), dp[u].with.value()) {
                    let delta = t - w;
                    if best.is_none_or(|(d, _)| delta < d) {
                        best = Some((delta, u));
                    }
                }
            }
            match best {
                Some((_, u)) => {
                    let others: Cost = kids.iter().filter(|&&w| w != u).map(|&w| dp[w].with).sum();
                    (through(u) + others, Some(u))
                }
                None => (Cost::Infeasible, None),
            }
        }
        1 => {
            let u = blocked[0];
            let others: Cost = kids.iter().filter(|&&w| w != u).map(|&w| dp[w].with).sum();
            let total = through(u) + others;
            if total.is_finite() {
                (total, Some(u))
            } else {
                (Cost::Infeasible, None)
            }
        }
        _ => (Cost::Infeasible, None),
    }
}

/// Best nonempty child set for an `m`-vertex.
///
/// Children whose `with` cost is infeasible are forced in; children with
/// strictly negative `len + without - with` join; if the set is still empty
/// the single child with the least such difference is added.
fn many_choice(tree: &LabeledTree, v: usize, dp: &[TreeDpValue]) -> (Cost, Vec<usize>) {
    let mut chosen = Vec::new();
    let mut total = Cost::Finite(0.0);
    let mut fallback: Option<(f64, usize)> = None;
    for &u in tree.children(v) {
        let inside = Cost::Finite(tree.edge_len(u)) + dp[u].without;
        let outside = dp[u].with;
        match (inside, outside) {
            (Cost::Infeasible, Cost::Infeasible) => return (Cost::Infeasible, Vec::new()),
            (Cost::Finite(_), Cost::Infeasible) => {
                chosen.push(u);
                total = total + inside;
            }
            (Cost::Infeasible, Cost::Finite(_)) => total = total + outside,
            (Cost::Finite(i), Cost::Finite(o)) => {
                let d = i - o;
                if d < 0.0 {
                    chosen.push(u);
                    total = total + inside;
                } else {
                    total = total + outside;
                    if fallback.is_none_or(|(best, _)| d < best) {
                        fallback = Some((d, u));
                    }
                }
            }
        }
    }
    if chosen.is_empty() {
        match fallback {
            Some((d, u)) => {
                chosen.push(u);
                total = total + Cost::Finite(d);
            }
            None => return (Cost::Infeasible, Vec::new()),
        }
    }
    (total, chosen)
}

/// DP values for every vertex, indexed by vertex.
pub fn tree_dp_all(tree: &LabeledTree) -> Vec<TreeDpValue> {
    let mut dp = vec![
        TreeDpValue {
            with: Cost::Infeasible,
            without: Cost::Finite(0.0),
        };
        tree.len()
    ];
    for &v in tree.preorder().iter().rev() {
        let without: Cost = tree.children(v).iter().map(|&u| dp[u].with).sum();
        let with = match tree.label(v) {
            Label::One => one_choice(tree, v, &dp).0,
            Label::Many => many_choice(tree, v, &dp).0,
        };
        dp[v] = TreeDpValue { with, without };
    }
    dp
}

/// `C(T)` and `C(T \ root)`.
pub fn tree_dp(tree: &LabeledTree) -> TreeDpValue {
    tree_dp_all(tree)[tree.root()]
}

/// An optimal matching on a tree, as the set of non-root vertices whose
/// parent edge is used.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeMatching {
    /// `in_matching[v]` is true when edge `{v, parent(v)}` is used.
    pub in_matching: Vec<bool>,
    pub cost: f64,
}

#[derive(Clone, Copy)]
enum Mode {
    With,
    Without,
    /// Matched to its parent already; may take more children (m only).
    Covered,
}

/// Reconstructs an optimal matching realizing `C(T)`, or `None` when the
/// tree admits no many-to-one matching.
pub fn tree_optimal_matching(tree: &LabeledTree) -> Option<TreeMatching> {
    let dp = tree_dp_all(tree);
    let total = dp[tree.root()].with.value()?;
    let mut used = vec![false; tree.len()];
    let mut stack = vec![(tree.root(), Mode::With)];
    while let Some((v, mode)) = stack.pop() {
        let mode = match (mode, tree.label(v)) {
            (Mode::Covered, Label::Many) => {
                if dp[v].with.lt(dp[v].without) {
                    Mode::With
                } else {
                    Mode::Without
                }
            }
            (Mode::Covered, Label::One) => Mode::Without,
            (m, _) => m,
        };
        match mode {
            Mode::Without => {
                stack.extend(tree.children(v).iter().map(|&u| (u, Mode::With)));
            }
            Mode::With => match tree.label(v) {
                Label::One => {
                    let (_, pick) = one_choice(tree, v, &dp);
                    let pick = pick.expect("feasible subtree has a choice");
                    for &u in tree.children(v) {
                        if u == pick {
                            used[u] = true;
                            stack.push((u, Mode::Covered));
                        } else {
                            stack.push((u, Mode::With));
                        }
                    }
                }
                Label::Many => {
                    let (_, picks) = many_choice(tree, v, &dp);
                    for &u in tree.children(v) {
                        if picks.contains(&u) {
                            used[u] = true;
                            stack.push((u, Mode::Covered));
                        } else {
                            stack.push((u, Mode::With));
                        }
                    }
                }
            },
            Mode::Covered => unreachable!(),
        }
    }
    Some(TreeMatching {
        in_matching: used,
        cost: total,
    })
}
