//! Recursive distributional equation numerics: the constants `w_o`, `γ`,
//! `c*`, the closed-form laws `F` and `G`, and Monte Carlo population
//! dynamics for the fixed-point and endogeny checks.

mod constants;
mod dilog;
mod grid;
mod pool;
mod quad;

pub use constants::{
    c_star, c_star_integral, c_star_integral_report, c_star_integral_to, solve_wo, IntegralReport,
    RdeConstants, ZETA2,
};
pub use dilog::dilog;
pub use grid::GridIterator;
pub use pool::{
    bivariate_step, decreasing_within_noise, endogeny_probe, half_t_step, population_dynamics,
    t_step, BivariatePool, EndogenyRow, PoolStart, PopDynRow, SamplePool, StepReport,
    DEFAULT_TRUNC, MIN_TRUNC,
};
pub use quad::{integrate, Quad};
