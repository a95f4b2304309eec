//! Truncated Poisson weighted infinite trees and BP messages toward the root.
//!
//! Every node owns a random stream keyed by its path from the root, so a
//! node's edge lengths are the same whatever depth the tree is cut at. The
//! children of a node are the first `P` points of a rate-1 Poisson process,
//! multiplied by `α` when the node is labeled `o`.
//!
//! Messages toward the root after `k` synchronous steps from zero satisfy
//! `X^k(v) = min_i (len(v, v.i) - X^{k-1}(v.i))`, with a positive part when
//! `v` is labeled `m`; a node at depth `d` needs the tree down to `d + k`.
//! Two evaluators are provided: a leaf-up pass over a fully materialized
//! tree, and a depth-first window search that only opens the subtrees that
//! can still change the answer.

use std::cell::Cell;

use rayon::prelude::*;

use crate::error::{check_alpha, Error, Result};
use crate::graph::Label;
use crate::rde::RdeConstants;
use crate::rng::{mix64, streams, trial_seed, RngStream};
use crate::stats::ks_distance;

/// Default node cap for materialized trees.
pub const DEFAULT_NODE_CAP: u128 = 1 << 22;

fn root_key() -> u64 {
    mix64(streams::PWIT)
}

fn child_key(parent: u64, i: usize) -> u64 {
    mix64(parent.rotate_left(17) ^ mix64(i as u64 + 1))
}

fn scale_of(alpha: f64, label: Label) -> f64 {
    match label {
        Label::One => alpha,
        Label::Many => 1.0,
    }
}

/// Root label: `o` with probability `α / (1 + α)`, unless fixed.
fn draw_root_label(alpha: f64, tree_seed: u64, fixed: Option<Label>) -> Label {
    fixed.unwrap_or_else(|| {
        let mut rng = RngStream::new(tree_seed, streams::PWIT ^ 1);
        if rng.bernoulli(alpha / (1.0 + alpha)) {
            Label::One
        } else {
            Label::Many
        }
    })
}

/// Edge lengths from a node to its children, generated on demand.
struct Points {
    rng: RngStream,
    scale: f64,
    xi: f64,
}

impl Points {
    fn new(tree_seed: u64, key: u64, scale: f64) -> Self {
        Self {
            rng: RngStream::new(tree_seed, key),
            scale,
            xi: 0.0,
        }
    }

    fn next_len(&mut self) -> f64 {
        self.xi += self.rng.exp1();
        self.scale * self.xi
    }
}

fn check_shape(depth: usize, trunc: usize) -> Result<()> {
    if depth < 1 {
        return Err(Error::InvalidParameter("depth must be >= 1".into()));
    }
    if trunc < 8 {
        return Err(Error::InvalidParameter(format!(
            "branching cap must be >= 8, got {trunc}"
        )));
    }
    Ok(())
}

fn check_k(k: usize, depth: usize) -> Result<()> {
    if k >= depth {
        return Err(Error::InvalidParameter(format!(
            "k = {k} steps toward the root need depth >= k + 1, got depth {depth}"
        )));
    }
    Ok(())
}

/// A PWIT cut at depth `D` with `P` children per internal node, stored
/// level by level: the children of node `i` on level `d` are nodes
/// `i*P .. (i+1)*P` on level `d + 1`.
#[derive(Clone, Debug)]
pub struct TruncatedPwit {
    alpha: f64,
    depth: usize,
    trunc: usize,
    root_label: Label,
    /// `lengths[d - 1][j]`: edge from node `j` on level `d` to its parent.
    lengths: Vec<Vec<f64>>,
}

/// Materializes the tree with seed `tree_seed`. Fails when the node count
/// would exceed `node_cap`.
pub fn sample_pwit(
    alpha: f64,
    depth: usize,
    trunc: usize,
    tree_seed: u64,
    root_label: Option<Label>,
    node_cap: u128,
) -> Result<TruncatedPwit> {
    check_alpha(alpha)?;
    check_shape(depth, trunc)?;
    let nodes: u128 = (0..=depth as u32)
        .map(|d| (trunc as u128).saturating_pow(d))
        .fold(0u128, |a, b| a.saturating_add(b));
    if nodes > node_cap {
        return Err(Error::TreeTooLarge {
            nodes,
            cap: node_cap,
        });
    }
    let root_label = draw_root_label(alpha, tree_seed, root_label);
    let mut keys = vec![root_key()];
    let mut label = root_label;
    let mut lengths = Vec::with_capacity(depth);
    for _ in 0..depth {
        let scale = scale_of(alpha, label);
        let mut level = Vec::with_capacity(keys.len() * trunc);
        let mut next_keys = Vec::with_capacity(keys.len() * trunc);
        for &key in &keys {
            let mut pts = Points::new(tree_seed, key, scale);
            for i in 0..trunc {
                level.push(pts.next_len());
                next_keys.push(child_key(key, i));
            }
        }
        lengths.push(level);
        keys = next_keys;
        label = label.flip();
    }
    Ok(TruncatedPwit {
        alpha,
        depth,
        trunc,
        root_label,
        lengths,
    })
}

impl TruncatedPwit {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn root_label(&self) -> Label {
        self.root_label
    }

    pub fn label_at(&self, level: usize) -> Label {
        if level.is_multiple_of(2) {
            self.root_label
        } else {
            self.root_label.flip()
        }
    }

    /// Edge lengths from node `i` on `level` to its children.
    pub fn child_lengths(&self, level: usize, i: usize) -> &[f64] {
        &self.lengths[level][i * self.trunc..(i + 1) * self.trunc]
    }

    pub fn node_count(&self) -> usize {
        1 + self.lengths.iter().map(Vec::len).sum::<usize>()
    }

    /// `X^k` from every child of the root toward the root, by a leaf-up pass.
    pub fn root_messages(&self, k: usize) -> Result<Vec<f64>> {
        check_k(k, self.depth)?;
        // Messages from level `k + 1` after zero steps.
        let mut msgs = vec![0.0; self.lengths[k].len()];
        for level in (1..=k).rev() {
            let clip = self.label_at(level) == Label::Many;
            let count = self.lengths[level - 1].len();
            msgs = (0..count)
                .map(|i| {
                    let lens = self.child_lengths(level, i);
                    let below = &msgs[i * self.trunc..(i + 1) * self.trunc];
                    let m = lens
                        .iter()
                        .zip(below)
                        .map(|(l, x)| l - x)
                        .fold(f64::INFINITY, f64::min);
                    if clip {
                        m.max(0.0)
                    } else {
                        m
                    }
                })
                .collect();
        }
        if k == 0 {
            msgs.truncate(self.trunc);
        }
        Ok(msgs)
    }
}

/// Settings for the depth-first evaluator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PwitConfig {
    pub alpha: f64,
    pub depth: usize,
    pub trunc: usize,
    /// An `o` node skips child `i` once `len_i - best` exceeds this, i.e. it
    /// assumes the child's `m` message is below the margin. `INFINITY`
    /// makes the evaluation exact.
    pub margin: f64,
    pub root_label: Option<Label>,
}

impl PwitConfig {
    /// Margin `ln(α / (γ ε))` with `ε = 1e-12`, where `G(t) <= (α/γ) e^{-t}`
    /// puts the chance of any single skip being wrong below `ε`.
    pub fn new(alpha: f64, depth: usize, trunc: usize) -> Result<Self> {
        let k = RdeConstants::new(alpha)?;
        check_shape(depth, trunc)?;
        Ok(Self {
            alpha,
            depth,
            trunc,
            margin: (alpha / (k.gamma() * 1e-12)).ln(),
            root_label: None,
        })
    }

    pub fn exact(mut self) -> Self {
        self.margin = f64::INFINITY;
        self
    }

    pub fn with_root_label(mut self, label: Option<Label>) -> Self {
        self.root_label = label;
        self
    }
}

/// Messages toward the root of one tree.
#[derive(Clone, Debug, PartialEq)]
pub struct RootMessages {
    pub root_label: Label,
    /// Messages from the first `children` root children, in order.
    pub messages: Vec<f64>,
    /// Exactly evaluated nodes whose minimum was attained at index `>= P/2`.
    pub late: u64,
    /// Exactly evaluated nodes.
    pub exact_nodes: u64,
}

struct Search {
    tree_seed: u64,
    alpha: f64,
    trunc: usize,
    margin: f64,
    late: Cell<u64>,
    exact: Cell<u64>,
}

/// Outcome of a windowed evaluation.
#[derive(Clone, Copy, Debug)]
enum Val {
    Exact(f64),
    AtMost,
    AtLeast,
}

impl Search {
    fn exact(&self, v: f64) -> Val {
        self.exact.set(self.exact.get() + 1);
        Val::Exact(v)
    }

    /// Message from node `key` (labeled `label`) toward its parent after `r`
    /// steps: exact when it lies in `(a, b)`, otherwise only which side.
    fn value(&self, key: u64, label: Label, r: usize, a: f64, b: f64) -> Val {
        if r == 0 {
            return Val::Exact(0.0);
        }
        let scale = scale_of(self.alpha, label);
        let mut pts = Points::new(self.tree_seed, key, scale);
        if r == 1 {
            return self.exact(pts.next_len());
        }
        let clip = label == Label::Many;
        let lo = if clip { a.max(0.0) } else { a };
        let child = label.flip();
        let mut best = b;
        let mut arg = usize::MAX;
        let mut low = false;
        for i in 0..self.trunc {
            let len = pts.next_len();
            let ck = child_key(key, i);
            let upper = match child {
                Label::Many => self.margin,
                // An o message is at most its first edge, since m messages
                // are nonnegative.
                Label::One => Points::new(self.tree_seed, ck, self.alpha).next_len(),
            };
            if len - upper >= best {
                if child == Label::Many {
                    break;
                }
                continue;
            }
            match self.value(ck, child, r - 1, len - best, len - lo) {
                Val::AtMost => {}
                Val::AtLeast => {
                    low = true;
                    break;
                }
                Val::Exact(v) => {
                    let term = len - v;
                    if term < best {
                        best = term;
                        arg = i;
                    }
                    if best <= lo {
                        low = true;
                        break;
                    }
                }
            }
        }
        if low {
            return if clip && a < 0.0 {
                self.exact(0.0)
            } else {
                Val::AtMost
            };
        }
        if best >= b {
            return Val::AtLeast;
        }
        if arg >= self.trunc / 2 {
            self.late.set(self.late.get() + 1);
        }
        self.exact(if clip { best.max(0.0) } else { best })
    }

    fn root_message(&self, key: u64, label: Label, r: usize) -> f64 {
        match self.value(key, label, r, f64::NEG_INFINITY, f64::INFINITY) {
            Val::Exact(v) => v,
            other => unreachable!("unbounded window returned {other:?}"),
        }
    }
}

/// `X^k` toward the root from its first `children` children, evaluated
/// lazily on the tree with seed `tree_seed`. Requires `k < depth`.
pub fn pwit_bp(
    cfg: &PwitConfig,
    tree_seed: u64,
    k: usize,
    children: usize,
) -> Result<RootMessages> {
    check_alpha(cfg.alpha)?;
    check_shape(cfg.depth, cfg.trunc)?;
    check_k(k, cfg.depth)?;
    if children == 0 || children > cfg.trunc {
        return Err(Error::InvalidParameter(format!(
            "children must be in 1..={}, got {children}",
            cfg.trunc
        )));
    }
    let root_label = draw_root_label(cfg.alpha, tree_seed, cfg.root_label);
    let search = Search {
        tree_seed,
        alpha: cfg.alpha,
        trunc: cfg.trunc,
        margin: cfg.margin,
        late: Cell::new(0),
        exact: Cell::new(0),
    };
    let root = root_key();
    let messages = (0..children)
        .map(|i| search.root_message(child_key(root, i), root_label.flip(), k))
        .collect();
    Ok(RootMessages {
        root_label,
        messages,
        late: search.late.get(),
        exact_nodes: search.exact.get(),
    })
}

/// Pooled root-incoming messages for one `k`, split by the sender's label.
#[derive(Clone, Debug, PartialEq)]
pub struct PwitSummary {
    pub k: usize,
    /// Messages sent by `o` children (root labeled `m`); law `F` in the limit.
    pub from_o: Vec<f64>,
    /// Messages sent by `m` children (root labeled `o`); law `G` in the limit.
    pub from_m: Vec<f64>,
    pub ks_o: f64,
    pub ks_m: f64,
    pub late_fraction: f64,
}

impl PwitSummary {
    pub const CSV_HEADER: &'static str = "k,n_from_o,ks_to_f,n_from_m,ks_to_g,late_fraction";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.k,
            self.from_o.len(),
            self.ks_o,
            self.from_m.len(),
            self.ks_m,
            self.late_fraction
        )
    }
}

/// Runs `trees` independent trees (tree `t` has seed `trial_seed(seed, t)`)
/// for every `k` in `ks` and compares the pooled messages with `F` and `G`.
pub fn pwit_ensemble(
    cfg: &PwitConfig,
    trees: usize,
    ks: &[usize],
    children: usize,
    seed: u64,
) -> Result<Vec<PwitSummary>> {
    let consts = RdeConstants::new(cfg.alpha)?;
    ks.iter()
        .map(|&k| {
            let runs: Vec<RootMessages> = (0..trees as u64)
                .into_par_iter()
                .map(|t| pwit_bp(cfg, trial_seed(seed, t), k, children))
                .collect::<Result<_>>()?;
            let mut from_o = Vec::new();
            let mut from_m = Vec::new();
            let (mut late, mut exact) = (0u64, 0u64);
            for r in &runs {
                match r.root_label {
                    Label::Many => from_o.extend(&r.messages),
                    Label::One => from_m.extend(&r.messages),
                }
                late += r.late;
                exact += r.exact_nodes;
            }
            let ks_o = if from_o.is_empty() {
                f64::NAN
            } else {
                ks_distance(&from_o, |t| consts.ccdf_o(t), |t| consts.ccdf_o(t))
            };
            let ks_m = if from_m.is_empty() {
                f64::NAN
            } else {
                ks_distance(&from_m, |t| consts.ccdf_m(t), |t| consts.ccdf_m_left(t))
            };
            Ok(PwitSummary {
                k,
                from_o,
                from_m,
                ks_o,
                ks_m,
                late_fraction: late as f64 / exact.max(1) as f64,
            })
        })
        .collect()
}
