//! Ground-truth solvers: exhaustive search, the assignment reduction, and
//! dynamic programming on labeled trees.

mod hungarian;
mod tree;

pub use hungarian::solve_assignment;
pub use tree::{
    tree_dp, tree_dp_all, tree_optimal_matching, Cost, LabeledTree, TreeDpValue, TreeMatching,
};

use crate::error::{Error, Result};
use crate::graph::{matching_cost, BipartiteInstance, ManyToOneMatching};

/// Size limits for [`brute_force_with_cap`].
#[derive(Clone, Copy, Debug)]
pub struct BruteForceCap {
    pub max_n: usize,
    pub max_m: usize,
}

impl Default for BruteForceCap {
    fn default() -> Self {
        Self { max_n: 9, max_m: 5 }
    }
}

pub fn brute_force(inst: &BipartiteInstance) -> Result<(ManyToOneMatching, f64)> {
    brute_force_with_cap(inst, BruteForceCap::default())
}

/// Enumerates all `m^n` maps A -> B in lexicographic order and keeps the
/// first onto map of minimum cost.
pub fn brute_force_with_cap(
    inst: &BipartiteInstance,
    cap: BruteForceCap,
) -> Result<(ManyToOneMatching, f64)> {
    let (n, m) = (inst.n(), inst.m());
    if n > cap.max_n || m > cap.max_m {
        return Err(Error::BruteForceCap {
            n,
            m,
            max_n: cap.max_n,
            max_m: cap.max_m,
        });
    }
    let mut assign = vec![0usize; n];
    let mut degree = vec![0usize; m];
    degree[0] = n;
    let mut covered = 1usize;
    let mut best: Option<(Vec<usize>, f64)> = None;

    loop {
        if covered == m {
            let cost: f64 = assign
                .iter()
                .enumerate()
                .map(|(a, &b)| inst.weight(a, b))
                .sum();
            if best.as_ref().is_none_or(|(_, c)| cost < *c) {
                best = Some((assign.clone(), cost));
            }
        }
        // Odometer increment, last position fastest.
        let mut pos = n;
        loop {
            if pos == 0 {
                let (assign, cost) = best.expect("m <= n always admits an onto map");
                return Ok((ManyToOneMatching::new(assign, m)?, cost));
            }
            pos -= 1;
            let old = assign[pos];
            degree[old] -= 1;
            if degree[old] == 0 {
                covered -= 1;
            }
            if old + 1 < m {
                assign[pos] = old + 1;
                degree[old + 1] += 1;
                if degree[old + 1] == 1 {
                    covered += 1;
                }
                break;
            }
            assign[pos] = 0;
            degree[0] += 1;
            if degree[0] == 1 {
                covered += 1;
            }
        }
    }
}

/// Exact solver via reduction to a square assignment problem.
///
/// Column `j < m` of the `n x n` cost matrix is B-vertex `j`; columns
/// `m..n` are surplus slots costing each row its cheapest edge. A-vertices
/// placed on a surplus slot go to their row argmin.
pub fn reduction_solve(inst: &BipartiteInstance) -> Result<(ManyToOneMatching, f64)> {
    let (n, m) = (inst.n(), inst.m());
    if m == 0 || m > n {
        return Err(Error::DimensionMismatch(format!(
            "need n >= m >= 1, got n = {n}, m = {m}"
        )));
    }
    let mut cost = vec![0.0; n * n];
    for a in 0..n {
        let row = inst.row(a);
        let (_, min) = inst.row_min(a);
        let dst = &mut cost[a * n..(a + 1) * n];
        dst[..m].copy_from_slice(row);
        dst[m..].fill(min);
    }
    let slots = solve_assignment(&cost, n, n);
    let assign = slots
        .iter()
        .enumerate()
        .map(|(a, &j)| if j < m { j } else { inst.row_min(a).0 })
        .collect();
    finish(inst, assign)
}

/// Same optimum as [`reduction_solve`] with the `n - m` identical surplus
/// columns collapsed.
///
/// Every optimal solution pays each row's minimum plus, for one distinct
/// "dedicated" A-vertex per B-vertex, the excess `w[a][b] - min_b' w[a][b']`.
/// Choosing the dedicated vertices is an `m x n` rectangular assignment,
/// which costs `O(m^2 n)` instead of `O(n^3)`.
pub fn reduction_solve_compact(inst: &BipartiteInstance) -> Result<(ManyToOneMatching, f64)> {
    let (n, m) = (inst.n(), inst.m());
    if m == 0 || m > n {
        return Err(Error::DimensionMismatch(format!(
            "need n >= m >= 1, got n = {n}, m = {m}"
        )));
    }
    let mins: Vec<(usize, f64)> = (0..n).map(|a| inst.row_min(a)).collect();
    let mut excess = vec![0.0; m * n];
    for a in 0..n {
        let row = inst.row(a);
        for b in 0..m {
            excess[b * n + a] = row[b] - mins[a].1;
        }
    }
    let dedicated = solve_assignment(&excess, m, n);
    let mut assign: Vec<usize> = mins.iter().map(|&(b, _)| b).collect();
    for (b, &a) in dedicated.iter().enumerate() {
        assign[a] = b;
    }
    finish(inst, assign)
}

fn finish(inst: &BipartiteInstance, assign: Vec<usize>) -> Result<(ManyToOneMatching, f64)> {
    let mm = ManyToOneMatching::new(assign, inst.m())?;
    let cost = matching_cost(inst, &mm)?;
    Ok((mm, cost))
}
