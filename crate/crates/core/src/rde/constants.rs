//! Fixed-point constants and closed-form laws of the two-step equation
//!
//! ```text
//! X^o = min_i (α ξ_i − X^m_i),    X^m = min_i (ξ_i − X^o_i)^+
//! ```
//!
//! with `ξ` a rate-1 Poisson process. `F` and `G` are the complementary
//! distribution functions of `X^o` and `X^m`.

use std::f64::consts::PI;

use super::dilog::dilog;
use super::quad::integrate;
use crate::error::{check_alpha, Error, Result};
use crate::rng::RngStream;

/// Positive root of `w + e^{-w} = α`, by Newton's method safeguarded with
/// bisection on `[α - 1, α]`.
pub fn solve_wo(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    // h(w) = w + e^{-w} - α, written to keep precision as α → 1.
    let excess = alpha - 1.0;
    let h = |w: f64| (w + (-w).exp_m1()) - excess;
    let (mut lo, mut hi) = (excess, alpha);
    let mut w = (2.0 * excess).sqrt().clamp(lo, hi);
    for _ in 0..200 {
        let hw = h(w);
        if hw == 0.0 {
            return Ok(w);
        }
        if hw < 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let slope = -(-w).exp_m1();
        let mut next = w - hw / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - w).abs() <= 4.0 * f64::EPSILON * w {
            return Ok(next);
        }
        w = next;
    }
    Ok(w)
}

/// `α`, `w_o`, `γ = w_o e^{w_o}` and the limit constant `c*`, with
/// evaluators and samplers for `F`, `G` and the density `f = -F'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RdeConstants {
    alpha: f64,
    w_o: f64,
    gamma: f64,
    ln_gamma: f64,
    c_star: f64,
}

impl RdeConstants {
    pub fn new(alpha: f64) -> Result<Self> {
        let w_o = solve_wo(alpha)?;
        let gamma = w_o * w_o.exp();
        let inv = 1.0 / gamma;
        let l = inv.ln_1p();
        let c_star = -dilog(-inv)? - 0.5 * l * l + w_o * l + w_o;
        Ok(Self {
            alpha,
            w_o,
            gamma,
            ln_gamma: w_o.ln() + w_o,
            c_star,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn w_o(&self) -> f64 {
        self.w_o
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn c_star(&self) -> f64 {
        self.c_star
    }

    /// `E[X^m] = ∫_0^∞ G = -α ln(w_o / α)`.
    pub fn w_m(&self) -> f64 {
        -self.alpha * (self.w_o / self.alpha).ln()
    }

    /// `G(0) = α / (1 + γ)`, the mass of `X^m` above zero.
    pub fn g_at_zero(&self) -> f64 {
        self.alpha / (1.0 + self.gamma)
    }

    /// `F(t) = P(X^o > t)`.
    pub fn ccdf_o(&self, t: f64) -> f64 {
        if t >= 0.0 {
            self.w_o / self.alpha * (-t / self.alpha).exp()
        } else {
            1.0 / (1.0 + (t - self.ln_gamma).exp())
        }
    }

    /// `G(t) = P(X^m > t)`.
    pub fn ccdf_m(&self, t: f64) -> f64 {
        if t >= 0.0 {
            self.alpha / (1.0 + (t + self.ln_gamma).exp())
        } else {
            1.0
        }
    }

    /// `P(X^m >= t)`: equals `G` except at the atom `t = 0`.
    pub fn ccdf_m_left(&self, t: f64) -> f64 {
        if t > 0.0 {
            self.ccdf_m(t)
        } else {
            1.0
        }
    }

    /// Density of `X^o`. It jumps at 0; the value there is the left limit.
    pub fn density_o(&self, t: f64) -> f64 {
        if t > 0.0 {
            self.w_o / (self.alpha * self.alpha) * (-t / self.alpha).exp()
        } else {
            let c = (0.5 * (self.ln_gamma - t)).cosh();
            0.25 / (c * c)
        }
    }

    /// Draw from `F` by inverting each piece.
    pub fn sample_o(&self, rng: &mut RngStream) -> f64 {
        let u = rng.open01();
        if u <= self.w_o / self.alpha {
            -self.alpha * (self.alpha * u / self.w_o).ln()
        } else {
            self.ln_gamma + (-u).ln_1p() - u.ln()
        }
    }

    /// Draw from `G`; returns exactly 0 with probability `1 - G(0)`.
    pub fn sample_m(&self, rng: &mut RngStream) -> f64 {
        let u = rng.open01();
        if u >= self.g_at_zero() {
            0.0
        } else {
            ((self.alpha - u) / u).ln() - self.ln_gamma
        }
    }
}

/// `c*(α) = -Li₂(-1/γ) - ½ln²(1 + 1/γ) + w_o ln(1 + 1/γ) + w_o`.
pub fn c_star(alpha: f64) -> Result<f64> {
    Ok(RdeConstants::new(alpha)?.c_star())
}

/// Outcome of the double-integral evaluation of `c*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralReport {
    pub value: f64,
    /// Upper end of the outer `z` range.
    pub z_max: f64,
    /// Bound on the neglected `z > z_max` part.
    pub tail_bound: f64,
    /// Quadrature error estimate of the outer integral.
    pub error: f64,
}

const OUTER_TOL: f64 = 1e-11;
const INNER_TOL: f64 = 1e-15;

/// `c*` as `(1/α) ∫_0^∞ z ∫ G(z - x) f(x) dx dz`, the expected length of
/// the matched edge at an `o` root whose neighbor sits at distance `z`.
pub fn c_star_integral(alpha: f64) -> Result<f64> {
    Ok(c_star_integral_report(alpha, 1e-12)?.value)
}

/// Like [`c_star_integral`], choosing the outer cutoff so the analytic tail
/// bound is below `tail_target`.
pub fn c_star_integral_report(alpha: f64, tail_target: f64) -> Result<IntegralReport> {
    let k = RdeConstants::new(alpha)?;
    let mut z_max = 8.0 * alpha;
    while outer_tail_bound(&k, z_max) > tail_target {
        z_max *= 1.25;
    }
    c_star_integral_to(&k, z_max)
}

/// Outer integral over `[0, z_max]` only.
pub fn c_star_integral_to(k: &RdeConstants, z_max: f64) -> Result<IntegralReport> {
    if z_max.is_nan() || z_max <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "z_max must be positive, got {z_max}"
        )));
    }
    let failure = std::cell::Cell::new(None);
    let outer = integrate(
        |z| match inner(k, z) {
            Ok(v) => z * v / k.alpha,
            Err(e) => {
                failure.set(Some(e.to_string()));
                0.0
            }
        },
        0.0,
        z_max,
        OUTER_TOL,
    )?;
    if let Some(msg) = failure.take() {
        return Err(Error::InvalidParameter(format!(
            "inner quadrature failed: {msg}"
        )));
    }
    Ok(IntegralReport {
        value: outer.value,
        z_max,
        tail_bound: outer_tail_bound(k, z_max),
        error: outer.error,
    })
}

/// `∫ G(z - x) f(x) dx`, split where either closed form changes piece.
fn inner(k: &RdeConstants, z: f64) -> Result<f64> {
    // x < 0, written with y = -x.
    let y_max = 0.5 * ((k.alpha / (2.0 * k.gamma * k.gamma)).max(1.0) / 1e-18).ln() + 1.0;
    let left = integrate(|y| k.ccdf_m(z + y) * k.density_o(-y), 0.0, y_max, INNER_TOL)?;
    let middle = integrate(|x| k.ccdf_m(z - x) * k.density_o(x), 0.0, z, INNER_TOL)?;
    // G = 1 for x > z.
    Ok(left.value + middle.value + k.ccdf_o(z))
}

/// `(1/α) ∫_Z^∞ z [F(z/2) + G(z/2)] dz`, which dominates the neglected
/// outer tail because the inner integral is at most `F(z/2) + G(z/2)`.
fn outer_tail_bound(k: &RdeConstants, z: f64) -> f64 {
    // ∫_Z^∞ z e^{-z/c} dz = c (Z + c) e^{-Z/c}
    let tail = |amp: f64, c: f64| amp * c * (z + c) * (-z / c).exp();
    let f_part = tail(k.w_o / k.alpha, 2.0 * k.alpha);
    let g_part = tail(k.alpha / k.gamma, 2.0);
    (f_part + g_part) / k.alpha
}

/// `π²/6`, the limit of `c*(α)` as `α → 1`.
pub const ZETA2: f64 = PI * PI / 6.0;

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect_wo(alpha: f64) -> f64 {
        let (mut lo, mut hi) = (alpha - 1.0, alpha);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid + (-mid).exp() < alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn wo_matches_bisection() {
        for alpha in [1.01, 1.5, 2.0, 3.0, 7.5, 40.0] {
            let w = solve_wo(alpha).unwrap();
            assert!((w - bisect_wo(alpha)).abs() < 1e-12, "alpha {alpha}");
        }
    }

    #[test]
    fn wo_residual_on_log_grid() {
        for i in 0..=200 {
            let alpha = if i == 0 {
                1.0 + 1e-6
            } else {
                100f64.powf(i as f64 / 200.0)
            };
            let w = solve_wo(alpha).unwrap();
            assert!(w > alpha - 1.0 && w < alpha);
            assert!((w + (-w).exp() - alpha).abs() < 1e-13, "alpha {alpha}");
        }
    }

    #[test]
    fn wo_near_one_and_domain() {
        assert!(solve_wo(1.0 + 1e-9).unwrap() < 1e-4);
        assert!(solve_wo(1.0).is_err());
        assert!(solve_wo(0.5).is_err());
        assert!(solve_wo(f64::NAN).is_err());
    }

    #[test]
    fn atom_of_g_at_zero() {
        for alpha in [1.2, 2.0, 5.0, 30.0] {
            let k = RdeConstants::new(alpha).unwrap();
            assert!((k.g_at_zero() - (alpha - k.w_o())).abs() < 1e-10);
            assert!((k.ccdf_m(0.0) - k.g_at_zero()).abs() < 1e-15);
            assert_eq!(k.ccdf_m(-1e-300), 1.0);
            assert_eq!(k.ccdf_m_left(0.0), 1.0);
        }
    }

    #[test]
    fn closed_form_identities() {
        for alpha in [1.5, 2.0, 3.0, 5.0] {
            let k = RdeConstants::new(alpha).unwrap();
            assert_eq!(k.ccdf_o(0.0), k.w_o() / alpha);
            assert!((k.ccdf_o(-1e-12) - k.ccdf_o(0.0)).abs() < 1e-11);
            for i in 0..1000 {
                let t = i as f64 * 0.03;
                let lhs = alpha * k.ccdf_o(-t) + k.ccdf_m(t);
                assert!((lhs - alpha).abs() < 1e-12, "alpha {alpha} t {t}");
            }
        }
    }

    #[test]
    fn integrals_of_the_laws() {
        for alpha in [1.5, 2.0, 4.0] {
            let k = RdeConstants::new(alpha).unwrap();
            let hi = 80.0 * alpha;
            let mass = integrate(|t| k.density_o(t), -60.0, 0.0, 1e-14)
                .unwrap()
                .value
                + integrate(|t| k.density_o(t), 0.0, hi, 1e-14).unwrap().value;
            assert!((mass - 1.0).abs() < 1e-10);
            let int_f = integrate(|t| k.ccdf_o(t), 0.0, hi, 1e-14).unwrap().value;
            assert!((int_f - k.w_o()).abs() < 1e-10);
            let int_g = integrate(|t| k.ccdf_m(t), 0.0, hi, 1e-14).unwrap().value;
            assert!((int_g - k.w_m()).abs() < 1e-10);
        }
    }

    #[test]
    fn density_is_minus_derivative() {
        let k = RdeConstants::new(2.5).unwrap();
        let h = 1e-5;
        for t in [-6.0, -1.0, -0.3, 0.4, 2.0, 9.0] {
            let d = (k.ccdf_o(t - h) - k.ccdf_o(t + h)) / (2.0 * h);
            assert!((d - k.density_o(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn extreme_arguments_stay_finite() {
        let k = RdeConstants::new(2.0).unwrap();
        assert_eq!(k.ccdf_m(1e4), 0.0);
        assert_eq!(k.density_o(-1e4), 0.0);
        assert_eq!(k.ccdf_o(-1e4), 1.0);
    }

    #[test]
    fn limit_constant_near_one() {
        let c = c_star(1.0 + 1e-6).unwrap();
        assert!((c - ZETA2).abs() < 1e-3, "{c}");
    }

    #[test]
    fn closed_form_matches_double_integral() {
        for alpha in [1.5, 2.0, 3.0, 5.0, 10.0] {
            let closed = c_star(alpha).unwrap();
            let integral = c_star_integral(alpha).unwrap();
            assert!(
                (closed - integral).abs() < 1e-8,
                "alpha {alpha}: {closed} vs {integral}"
            );
        }
    }

    #[test]
    fn cutoff_tail_is_negligible() {
        let k = RdeConstants::new(2.0).unwrap();
        let r = c_star_integral_report(2.0, 1e-10).unwrap();
        assert!(r.tail_bound < 1e-10);
        let longer = c_star_integral_to(&k, 2.0 * r.z_max).unwrap();
        assert!((longer.value - r.value).abs() < 1e-9);
    }

    #[test]
    fn c_star_exceeds_mean_row_minimum() {
        // Each A-vertex pays at least its cheapest edge, of mean α per n.
        for alpha in [1.1, 1.2, 1.5, 2.0, 3.0, 5.0, 10.0] {
            let c = c_star(alpha).unwrap();
            assert!(c > alpha, "alpha {alpha}: {c}");
        }
    }
}
