//! Min-sum belief propagation for many-to-one matching.
//!
//! Messages are extended reals stored as `f64`: an exclusion minimum over an
//! empty set is `+inf`, and the usual IEEE rules carry it through `w - x`,
//! positive parts and argmins. Weights are always finite, so no `inf - inf`
//! arises.
//!
//! [`dense`] runs on the complete graph `K_{n,m}` of a [`BipartiteInstance`];
//! [`sparse`] runs the same rules on an arbitrary bipartite graph, which is
//! how tree instances are handled.
//!
//! [`BipartiteInstance`]: crate::graph::BipartiteInstance

pub mod dense;
mod repair;
pub mod sparse;

pub use dense::{
    bp_decide, bp_solve, bp_step, BpOutcome, DecisionMap, DenseBp, IterationStats, MessageState,
};
pub use repair::{bp_repair, Repair};
pub use sparse::{SparseBipartite, SparseMessages};

/// Smallest and second-smallest values of a stream with the lowest index
/// attaining the smallest. Answers "min over all but `i`" in O(1).
#[derive(Clone, Copy, Debug)]
pub(crate) struct TwoMin {
    pub min1: f64,
    pub arg1: usize,
    pub min2: f64,
}

impl TwoMin {
    pub const EMPTY: TwoMin = TwoMin {
        min1: f64::INFINITY,
        arg1: usize::MAX,
        min2: f64::INFINITY,
    };

    #[inline]
    pub fn push(&mut self, i: usize, x: f64) {
        if x < self.min1 || self.arg1 == usize::MAX {
            self.min2 = self.min1;
            self.min1 = x;
            self.arg1 = i;
        } else if x < self.min2 {
            self.min2 = x;
        }
    }

    #[inline]
    pub fn excluding(&self, i: usize) -> f64 {
        if i == self.arg1 {
            self.min2
        } else {
            self.min1
        }
    }
}

/// `max(x, 0)`, with `-inf` mapping to 0.
#[inline]
pub(crate) fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// Largest absolute change between two message arrays; equal infinities
/// count as no change.
pub(crate) fn sup_delta(old: &[f64], new: &[f64]) -> f64 {
    old.iter()
        .zip(new)
        .map(|(&a, &b)| if a == b { 0.0 } else { (a - b).abs() })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_min_exclusion() {
        let mut t = TwoMin::EMPTY;
        for (i, x) in [3.0, 1.0, 2.0, 1.0].into_iter().enumerate() {
            t.push(i, x);
        }
        assert_eq!(t.arg1, 1);
        assert_eq!(t.excluding(1), 1.0);
        assert_eq!(t.excluding(0), 1.0);

        let mut single = TwoMin::EMPTY;
        single.push(0, 5.0);
        assert_eq!(single.excluding(0), f64::INFINITY);
        assert_eq!(single.excluding(1), 5.0);
    }

    #[test]
    fn two_min_accepts_infinite_first_value() {
        let mut t = TwoMin::EMPTY;
        t.push(0, f64::INFINITY);
        t.push(1, f64::INFINITY);
        assert_eq!(t.arg1, 0);
    }

    #[test]
    fn delta_handles_infinities() {
        let inf = f64::INFINITY;
        assert_eq!(sup_delta(&[inf, 1.0], &[inf, 1.5]), 0.5);
        assert_eq!(sup_delta(&[inf], &[2.0]), inf);
    }
}
