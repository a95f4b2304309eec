//! Minimum-weight many-to-one matching on random complete bipartite graphs.
//!
//! * [`graph`]: instances, matchings, feasibility and cost.
//! * [`exact`]: brute force, assignment reduction, tree dynamic program.
//! * [`bp`]: min-sum belief propagation with decision and repair.
//! * [`rde`]: fixed-point constants, closed-form laws, population dynamics.
//! * [`pwit`]: truncated Poisson weighted infinite trees and BP on them.
//! * [`experiment`]: seeded Monte Carlo sweeps with CSV output.

pub mod bp;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod graph;
pub mod pwit;
pub mod rde;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{
    gen_instance, is_feasible, matching_cost, BipartiteInstance, Label, ManyToOneMatching,
};
