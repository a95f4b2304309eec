//! BP on the complete bipartite graph with O(nm) synchronous steps.

use super::{pos, sup_delta, TwoMin};
use crate::bp::repair::{bp_repair, Repair};
use crate::error::{Error, Result};
use crate::graph::{matching_cost, BipartiteInstance, ManyToOneMatching};

/// Iterate `k` of the two message planes.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageState {
    k: usize,
    n: usize,
    m: usize,
    /// `n x m`: message from A-vertex `a` toward B-vertex `b`.
    x_ab: Vec<f64>,
    /// `m x n`: message from B-vertex `b` toward A-vertex `a`.
    x_ba: Vec<f64>,
}

impl MessageState {
    /// All-zero messages, iterate 0.
    pub fn zeros(inst: &BipartiteInstance) -> Self {
        let (n, m) = (inst.n(), inst.m());
        Self {
            k: 0,
            n,
            m,
            x_ab: vec![0.0; n * m],
            x_ba: vec![0.0; m * n],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn a_to_b(&self, a: usize, b: usize) -> f64 {
        self.x_ab[a * self.m + b]
    }

    #[inline]
    pub fn b_to_a(&self, b: usize, a: usize) -> f64 {
        self.x_ba[b * self.n + a]
    }

    pub fn x_ab(&self) -> &[f64] {
        &self.x_ab
    }

    pub fn x_ba(&self) -> &[f64] {
        &self.x_ba
    }

    fn check(&self, inst: &BipartiteInstance) -> Result<()> {
        if self.n != inst.n() || self.m != inst.m() {
            return Err(Error::DimensionMismatch(format!(
                "messages are {}x{}, instance is {}x{}",
                self.n,
                self.m,
                inst.n(),
                inst.m()
            )));
        }
        Ok(())
    }
}

/// Reusable BP engine for one instance. Keeps a transposed copy of the
/// weights so both half-steps scan memory contiguously.
pub struct DenseBp<'a> {
    inst: &'a BipartiteInstance,
    /// `m x n` transpose of the weights.
    wt: Vec<f64>,
    row_mins: Vec<TwoMin>,
    col_mins: Vec<TwoMin>,
}

impl<'a> DenseBp<'a> {
    pub fn new(inst: &'a BipartiteInstance) -> Self {
        let (n, m) = (inst.n(), inst.m());
        let mut wt = vec![0.0; m * n];
        for a in 0..n {
            for (b, &w) in inst.row(a).iter().enumerate() {
                wt[b * n + a] = w;
            }
        }
        Self {
            inst,
            wt,
            row_mins: vec![TwoMin::EMPTY; n],
            col_mins: vec![TwoMin::EMPTY; m],
        }
    }

    /// Writes iterate `k + 1` into `next`. Also leaves, in `self.row_mins`,
    /// the per-A-vertex argmin of `w - x_ba` under iterate `k`, i.e. the
    /// A-side decision for `cur`.
    pub fn step_into(&mut self, cur: &MessageState, next: &mut MessageState) {
        let (n, m) = (self.inst.n(), self.inst.m());
        self.scan_rows(cur);

        // B side: min over a != target of (w[a][b] - x_ab[a][b])^+.
        self.col_mins.fill(TwoMin::EMPTY);
        for a in 0..n {
            let w = self.inst.row(a);
            let x = &cur.x_ab[a * m..(a + 1) * m];
            for b in 0..m {
                self.col_mins[b].push(a, w[b] - x[b]);
            }
        }

        for a in 0..n {
            let t = self.row_mins[a];
            let out = &mut next.x_ab[a * m..(a + 1) * m];
            out.fill(t.min1);
            if t.arg1 < m {
                out[t.arg1] = t.min2;
            }
        }
        for b in 0..m {
            let t = self.col_mins[b];
            let out = &mut next.x_ba[b * n..(b + 1) * n];
            out.fill(pos(t.min1));
            if t.arg1 < n {
                out[t.arg1] = pos(t.min2);
            }
        }
        next.k = cur.k + 1;
        next.n = n;
        next.m = m;
    }

    /// A side: per row, two smallest of `w[a][u] - x_ba[u][a]` over `u`.
    fn scan_rows(&mut self, cur: &MessageState) {
        let (n, m) = (self.inst.n(), self.inst.m());
        self.row_mins.fill(TwoMin::EMPTY);
        for u in 0..m {
            let w = &self.wt[u * n..(u + 1) * n];
            let x = &cur.x_ba[u * n..(u + 1) * n];
            for a in 0..n {
                self.row_mins[a].push(u, w[a] - x[a]);
            }
        }
    }

    /// Per-A-vertex argmin partner under `state`.
    pub fn a_choices(&mut self, state: &MessageState) -> Vec<usize> {
        self.scan_rows(state);
        self.row_mins.iter().map(|t| t.arg1).collect()
    }
}

/// One synchronous BP update: iterate `k` to `k + 1`.
pub fn bp_step(inst: &BipartiteInstance, state: &MessageState) -> Result<MessageState> {
    state.check(inst)?;
    let mut next = state.clone();
    DenseBp::new(inst).step_into(state, &mut next);
    Ok(next)
}

/// Decision sets at an iterate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionMap {
    /// Chosen B-partner of each A-vertex.
    pub a_choice: Vec<usize>,
    /// A-vertices chosen by each B-vertex, ascending.
    pub b_choice: Vec<Vec<usize>>,
}

impl DecisionMap {
    /// Edges `{a, b}` picked from either side, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self.a_choice.iter().copied().enumerate().collect();
        for (b, picks) in self.b_choice.iter().enumerate() {
            e.extend(picks.iter().map(|&a| (a, b)));
        }
        e.sort_unstable();
        e.dedup();
        e
    }
}

/// A-vertices pick the argmin of `w - x_ba` (lowest index on ties).
/// B-vertices pick every A-vertex with `w - x_ab < 0`, or the single
/// argmin when none is negative.
pub fn bp_decide(inst: &BipartiteInstance, state: &MessageState) -> Result<DecisionMap> {
    state.check(inst)?;
    if state.k == 0 {
        return Err(Error::InvalidParameter(
            "decisions are defined for iterates k >= 1".into(),
        ));
    }
    let (n, m) = (inst.n(), inst.m());
    let a_choice = DenseBp::new(inst).a_choices(state);
    let mut b_choice = vec![Vec::new(); m];
    let mut best = vec![TwoMin::EMPTY; m];
    for a in 0..n {
        for b in 0..m {
            let d = inst.weight(a, b) - state.a_to_b(a, b);
            if d < 0.0 {
                b_choice[b].push(a);
            }
            best[b].push(a, d);
        }
    }
    for b in 0..m {
        if b_choice[b].is_empty() {
            let arg = best[b].arg1;
            if arg >= n {
                return Err(Error::InvalidParameter(format!(
                    "no decision for B-vertex {b}: non-comparable messages"
                )));
            }
            b_choice[b].push(arg);
        }
    }
    Ok(DecisionMap { a_choice, b_choice })
}

/// One row of the per-iteration diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationStats {
    pub k: usize,
    pub sup_delta_ab: f64,
    pub sup_delta_ba: f64,
    /// B-vertices not chosen by any A-vertex at iterate `k`.
    pub uncovered: usize,
}

impl IterationStats {
    pub const CSV_HEADER: &'static str = "k,sup_norm_delta_ab,sup_norm_delta_ba,uncovered_count";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.k, self.sup_delta_ab, self.sup_delta_ba, self.uncovered
        )
    }
}

#[derive(Clone, Debug)]
pub struct BpOutcome {
    pub matching: ManyToOneMatching,
    pub cost: f64,
    pub iterations: Vec<IterationStats>,
    pub decisions: DecisionMap,
    pub repair: Repair,
}

/// Runs `k_max` BP steps from zero messages, decides, and repairs into a
/// feasible matching.
pub fn bp_solve(inst: &BipartiteInstance, k_max: usize) -> Result<BpOutcome> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be >= 1".into()));
    }
    let m = inst.m();
    let uncovered_of = |choices: &mut dyn Iterator<Item = usize>| {
        let mut hit = vec![false; m];
        for b in choices {
            hit[b] = true;
        }
        hit.iter().filter(|&&h| !h).count()
    };
    let mut engine = DenseBp::new(inst);
    let mut cur = MessageState::zeros(inst);
    let mut next = cur.clone();
    let mut iterations: Vec<IterationStats> = Vec::with_capacity(k_max);
    for _ in 0..k_max {
        engine.step_into(&cur, &mut next);
        // The step just scanned iterate `cur.k`, which fills in the
        // coverage of the previous row.
        if let Some(prev) = iterations.last_mut() {
            prev.uncovered = uncovered_of(&mut engine.row_mins.iter().map(|t| t.arg1));
        }
        std::mem::swap(&mut cur, &mut next);
        iterations.push(IterationStats {
            k: cur.k,
            sup_delta_ab: sup_delta(&next.x_ab, &cur.x_ab),
            sup_delta_ba: sup_delta(&next.x_ba, &cur.x_ba),
            uncovered: 0,
        });
    }
    let last = engine.a_choices(&cur);
    iterations.last_mut().expect("k_max >= 1").uncovered = uncovered_of(&mut last.iter().copied());
    let decisions = bp_decide(inst, &cur)?;
    let repair = bp_repair(inst, &decisions)?;
    let cost = matching_cost(inst, &repair.matching)?;
    Ok(BpOutcome {
        matching: repair.matching.clone(),
        cost,
        iterations,
        decisions,
        repair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::reduction_solve_compact;
    use crate::graph::{gen_instance, is_feasible};
    use crate::rng::trial_seed;

    fn fixture(n: usize, m: usize, w: &[f64]) -> BipartiteInstance {
        BipartiteInstance::from_matrix(n, m, w.to_vec()).unwrap()
    }

    /// Direct O(nm * max(n, m)) evaluation of the update rule.
    fn naive_step(inst: &BipartiteInstance, s: &MessageState) -> (Vec<f64>, Vec<f64>) {
        let (n, m) = (inst.n(), inst.m());
        let mut ab = vec![0.0; n * m];
        let mut ba = vec![0.0; m * n];
        for a in 0..n {
            for b in 0..m {
                ab[a * m + b] = (0..m)
                    .filter(|&u| u != b)
                    .map(|u| inst.weight(a, u) - s.b_to_a(u, a))
                    .fold(f64::INFINITY, f64::min);
                ba[b * n + a] = (0..n)
                    .filter(|&u| u != a)
                    .map(|u| (inst.weight(u, b) - s.a_to_b(u, b)).max(0.0))
                    .fold(f64::INFINITY, f64::min);
            }
        }
        (ab, ba)
    }

    #[test]
    fn matches_naive_update() {
        for t in 0..10 {
            let inst = gen_instance(9, 1.6, trial_seed(4, t)).unwrap();
            let mut s = MessageState::zeros(&inst);
            for _ in 0..6 {
                let (ab, ba) = naive_step(&inst, &s);
                s = bp_step(&inst, &s).unwrap();
                assert_eq!(s.x_ab(), &ab[..]);
                assert_eq!(s.x_ba(), &ba[..]);
            }
        }
    }

    #[test]
    fn first_step_is_row_min_excluding_target() {
        let w = [4.0, 1.0, 3.0, 2.0, 2.0, 5.0, 7.0, 6.0, 9.0];
        let inst = fixture(3, 3, &w);
        let s = bp_step(&inst, &MessageState::zeros(&inst)).unwrap();
        assert_eq!(s.k(), 1);
        assert_eq!(s.a_to_b(0, 0), 1.0);
        assert_eq!(s.a_to_b(0, 1), 3.0);
        assert_eq!(s.a_to_b(0, 2), 1.0);
        assert_eq!(s.a_to_b(1, 0), 2.0);
        assert_eq!(s.a_to_b(1, 1), 2.0);
        // B side: column min excluding target, positive part.
        assert_eq!(s.b_to_a(0, 0), 2.0);
        assert_eq!(s.b_to_a(2, 1), 3.0);
        assert_eq!(s.b_to_a(2, 0), 5.0);
    }

    #[test]
    fn single_edge_instance() {
        let inst = fixture(1, 1, &[2.5]);
        let s = bp_step(&inst, &MessageState::zeros(&inst)).unwrap();
        assert_eq!(s.a_to_b(0, 0), f64::INFINITY);
        assert_eq!(s.b_to_a(0, 0), f64::INFINITY);
        let out = bp_solve(&inst, 3).unwrap();
        assert_eq!(out.matching.assign(), &[0]);
        assert_eq!(out.cost, 2.5);
    }

    #[test]
    fn m_equals_one_messages() {
        let inst = fixture(3, 1, &[1.0, 2.0, 3.0]);
        let s = bp_step(&inst, &MessageState::zeros(&inst)).unwrap();
        assert!(s.x_ab().iter().all(|&x| x == f64::INFINITY));
        let s2 = bp_step(&inst, &s).unwrap();
        // w - inf = -inf, positive part 0.
        assert!(s2.x_ba().iter().all(|&x| x == 0.0));
        let out = bp_solve(&inst, 5).unwrap();
        assert_eq!(out.cost, 6.0);
    }

    #[test]
    fn decide_needs_an_iterate() {
        let inst = fixture(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(bp_decide(&inst, &MessageState::zeros(&inst)).is_err());
        assert!(bp_solve(&inst, 0).is_err());
    }

    #[test]
    fn decisions_with_zero_messages_are_argmins() {
        let w = [4.0, 1.0, 3.0, 2.0, 2.0, 5.0, 7.0, 6.0, 9.0, 0.5, 8.0, 8.5];
        let inst = fixture(4, 3, &w);
        let mut s = MessageState::zeros(&inst);
        s.k = 1;
        let d = bp_decide(&inst, &s).unwrap();
        assert_eq!(d.a_choice, vec![1, 0, 1, 0]);
        assert_eq!(d.b_choice, vec![vec![3], vec![0], vec![0]]);
    }

    #[test]
    fn negative_differences_all_join() {
        let inst = fixture(3, 2, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let mut s = MessageState::zeros(&inst);
        s.k = 1;
        s.x_ab[1] = 3.0;
        s.x_ab[2 * 2 + 1] = 1.5;
        let d = bp_decide(&inst, &s).unwrap();
        assert_eq!(d.b_choice[1], vec![0, 2]);
        assert_eq!(d.b_choice[0], vec![0]);
    }

    #[test]
    fn solve_is_feasible_deterministic_and_not_below_optimum() {
        let inst = gen_instance(300, 2.0, 17).unwrap();
        let a = bp_solve(&inst, 50).unwrap();
        let b = bp_solve(&inst, 50).unwrap();
        assert!(is_feasible(&inst, &a.matching));
        assert_eq!(a.matching, b.matching);
        assert_eq!(a.cost.to_bits(), b.cost.to_bits());
        assert_eq!(a.iterations, b.iterations);
        let opt = reduction_solve_compact(&inst).unwrap().1;
        assert!(a.cost >= opt * (1.0 - 1e-12));
        assert!(a.cost / opt < 1.1, "ratio {}", a.cost / opt);
        assert_eq!(a.iterations.len(), 50);
        assert_eq!(a.repair.uncovered_before, a.iterations[49].uncovered);
    }

    #[test]
    fn diagnostics_track_each_iterate() {
        let inst = gen_instance(50, 2.0, 23).unwrap();
        let out = bp_solve(&inst, 6).unwrap();
        let mut prev = MessageState::zeros(&inst);
        for row in &out.iterations {
            let s = bp_step(&inst, &prev).unwrap();
            let d = bp_decide(&inst, &s).unwrap();
            let mm = ManyToOneMatching::new(d.a_choice, inst.m()).unwrap();
            assert_eq!(row.k, s.k());
            assert_eq!(row.uncovered, mm.uncovered().len());
            assert_eq!(row.sup_delta_ab, sup_delta(prev.x_ab(), s.x_ab()));
            assert_eq!(row.sup_delta_ba, sup_delta(prev.x_ba(), s.x_ba()));
            prev = s;
        }
    }

    #[test]
    fn b_messages_stay_nonnegative() {
        let inst = gen_instance(40, 3.0, 5).unwrap();
        let mut s = MessageState::zeros(&inst);
        for _ in 0..20 {
            s = bp_step(&inst, &s).unwrap();
            assert!(s.x_ba().iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn diagnostics_csv() {
        let row = IterationStats {
            k: 3,
            sup_delta_ab: 0.5,
            sup_delta_ba: 0.25,
            uncovered: 2,
        };
        assert_eq!(row.csv_row(), "3,0.5,0.25,2");
        assert_eq!(IterationStats::CSV_HEADER.split(',').count(), 4);
    }
}
