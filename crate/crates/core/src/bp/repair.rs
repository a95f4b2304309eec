//! Greedy repair of a BP decision into a feasible many-to-one matching.

use super::dense::DecisionMap;
use crate::error::{Error, Result};
use crate::graph::{is_feasible, BipartiteInstance, ManyToOneMatching};

#[derive(Clone, Debug, PartialEq)]
pub struct Repair {
    pub matching: ManyToOneMatching,
    /// Uncovered B-vertices in the A-side decision before any move.
    pub uncovered_before: usize,
    /// `(a, old partner, new partner)` in the order applied.
    pub moves: Vec<(usize, usize, usize)>,
}

/// Starts from the A-side choices and, while some B-vertex is uncovered,
/// moves the globally cheapest `(a, b)` with `a` on a shared partner and
/// `b` uncovered. Ties go to the lowest `a`, then the lowest `b`.
pub fn bp_repair(inst: &BipartiteInstance, d: &DecisionMap) -> Result<Repair> {
    let (n, m) = (inst.n(), inst.m());
    if d.a_choice.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "decision covers {} A-vertices, instance has {n}",
            d.a_choice.len()
        )));
    }
    let mut mm = ManyToOneMatching::new(d.a_choice.clone(), m)?;
    let mut uncovered = mm.uncovered();
    let uncovered_before = uncovered.len();
    let mut moves = Vec::with_capacity(uncovered_before);

    while !uncovered.is_empty() {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..n {
            if mm.bdegree()[mm.partner(a)] < 2 {
                continue;
            }
            let row = inst.row(a);
            for (i, &b) in uncovered.iter().enumerate() {
                if best.is_none_or(|(w, _, _)| row[b] < w) {
                    best = Some((row[b], a, i));
                }
            }
        }
        let (_, a, i) = best.expect("n >= m leaves a shared partner while any B is uncovered");
        let b = uncovered.remove(i);
        moves.push((a, mm.partner(a), b));
        mm.reassign(a, b);
    }
    assert!(
        is_feasible(inst, &mm),
        "repair ended with an infeasible matching"
    );
    Ok(Repair {
        matching: mm,
        uncovered_before,
        moves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::bp_solve;
    use crate::exact::reduction_solve_compact;
    use crate::graph::{gen_instance, matching_cost};
    use crate::rng::trial_seed;

    fn decision(a_choice: Vec<usize>, m: usize) -> DecisionMap {
        DecisionMap {
            a_choice,
            b_choice: vec![Vec::new(); m],
        }
    }

    #[test]
    fn covering_decision_is_untouched() {
        let inst =
            BipartiteInstance::from_matrix(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let r = bp_repair(&inst, &decision(vec![0, 1, 0], 2)).unwrap();
        assert_eq!(r.matching.assign(), &[0, 1, 0]);
        assert!(r.moves.is_empty());
        assert_eq!(r.uncovered_before, 0);
    }

    #[test]
    fn three_by_two_hand_trace() {
        // Column 1 holds 5, 2, 7: all three rows share partner 0, so row 1
        // is the cheapest move.
        let w = vec![1.0, 5.0, 1.5, 2.0, 0.5, 7.0];
        let inst = BipartiteInstance::from_matrix(3, 2, w).unwrap();
        let r = bp_repair(&inst, &decision(vec![0, 0, 0], 2)).unwrap();
        assert_eq!(r.moves, vec![(1, 0, 1)]);
        assert_eq!(r.matching.assign(), &[0, 1, 0]);
        assert_eq!(matching_cost(&inst, &r.matching).unwrap(), 1.0 + 2.0 + 0.5);

        // Cheapest entry in row 0 is also eligible.
        let w = vec![1.0, 0.1, 1.5, 2.0, 0.5, 7.0];
        let inst = BipartiteInstance::from_matrix(3, 2, w).unwrap();
        let r = bp_repair(&inst, &decision(vec![0, 0, 0], 2)).unwrap();
        assert_eq!(r.moves, vec![(0, 0, 1)]);
    }

    #[test]
    fn sole_cover_never_moves() {
        // Row 0 is the only cover of B0; it must stay even though its
        // column-2 entry is the cheapest.
        let w = vec![1.0, 9.0, 0.1, 9.0, 1.0, 5.0, 9.0, 1.0, 6.0, 9.0, 1.0, 7.0];
        let inst = BipartiteInstance::from_matrix(4, 3, w).unwrap();
        let r = bp_repair(&inst, &decision(vec![0, 1, 1, 1], 3)).unwrap();
        assert_eq!(r.moves, vec![(1, 1, 2)]);
    }

    #[test]
    fn repair_bounds_on_random_instances() {
        for t in 0..30 {
            let inst = gen_instance(60, 2.5, trial_seed(11, t)).unwrap();
            let d = decision((0..60).map(|a| inst.row_min(a).0).collect(), inst.m());
            let partial = matching_cost(
                &inst,
                &ManyToOneMatching::new(d.a_choice.clone(), inst.m()).unwrap(),
            )
            .unwrap();
            let r = bp_repair(&inst, &d).unwrap();
            assert!(r.moves.len() <= r.uncovered_before);
            assert_eq!(r.moves.len(), r.uncovered_before);
            let c = matching_cost(&inst, &r.matching).unwrap();
            assert!(c >= partial);
            assert!(c >= reduction_solve_compact(&inst).unwrap().1 - 1e-9);
        }
    }

    #[test]
    fn coverage_never_drops_during_repair() {
        let inst = gen_instance(80, 3.0, 3).unwrap();
        let out = bp_solve(&inst, 2).unwrap();
        let mut mm = ManyToOneMatching::new(out.decisions.a_choice.clone(), inst.m()).unwrap();
        let mut covered = inst.m() - mm.uncovered().len();
        for &(a, old, b) in &out.repair.moves {
            assert_eq!(mm.partner(a), old);
            mm.reassign(a, b);
            let now = inst.m() - mm.uncovered().len();
            assert_eq!(now, covered + 1);
            covered = now;
        }
    }

    #[test]
    fn rejects_wrong_length() {
        let inst = gen_instance(4, 2.0, 0).unwrap();
        assert!(bp_repair(&inst, &decision(vec![0, 1], 2)).is_err());
    }
}
