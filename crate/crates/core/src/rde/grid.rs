//! Deterministic iteration of `T` on a uniform grid, a low-resolution
//! cross-check for the pool method.
//!
//! With `ξ` a rate-1 Poisson process the two halves of `T` act on
//! complementary distribution functions as
//!
//! ```text
//! F(t) = exp(-(1/α) ∫_{-t}^∞ G),    G(t) = exp(-∫_{-t}^∞ F)  (t >= 0)
//! ```
//!
//! and `G = 1` on `t < 0`.

use super::constants::RdeConstants;
use crate::error::{check_alpha, Error, Result};

#[derive(Clone, Debug)]
pub struct GridIterator {
    alpha: f64,
    h: f64,
    /// Grid points `t_i = -L + i h`, `i = 0..=2K`; `t_K = 0`.
    half: usize,
    g: Vec<f64>,
    f: Vec<f64>,
    steps: usize,
}

impl GridIterator {
    /// Starts from `G_0`, sampled at the grid points (forced to 1 below 0).
    pub fn new(alpha: f64, h: f64, l: f64, g0: impl Fn(f64) -> f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(h > 0.0 && l > h) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < h < L, got h = {h}, L = {l}"
            )));
        }
        let half = (l / h).round() as usize;
        let g: Vec<f64> = (0..=2 * half)
            .map(|i| {
                if i < half {
                    1.0
                } else {
                    g0((i - half) as f64 * h)
                }
            })
            .collect();
        let mut it = Self {
            alpha,
            h,
            half,
            g,
            f: Vec::new(),
            steps: 0,
        };
        it.f = it.phi();
        Ok(it)
    }

    fn t(&self, i: usize) -> f64 {
        (i as f64 - self.half as f64) * self.h
    }

    /// `tail[i] = ∫_{t_i}^∞ v`, trapezoidal, with an exponential tail past
    /// the last point at rate `rate`. The cell ending at 0 uses `left_of_zero`
    /// throughout, which keeps the atom of `G` at 0 out of the integral.
    fn tails(&self, v: &[f64], rate: f64, left_of_zero: Option<f64>) -> Vec<f64> {
        let n = v.len();
        let mut tail = vec![0.0; n];
        tail[n - 1] = v[n - 1] / rate;
        for i in (0..n - 1).rev() {
            let cell = match left_of_zero {
                Some(x) if i + 1 == self.half => x * self.h,
                _ => 0.5 * (v[i] + v[i + 1]) * self.h,
            };
            tail[i] = tail[i + 1] + cell;
        }
        tail
    }

    fn phi(&self) -> Vec<f64> {
        let n = self.g.len();
        let tail = self.tails(&self.g, 1.0, Some(1.0));
        (0..n)
            .map(|i| (-tail[n - 1 - i] / self.alpha).exp())
            .collect()
    }

    fn gamma(&self) -> Vec<f64> {
        let n = self.f.len();
        let tail = self.tails(&self.f, 1.0 / self.alpha, None);
        (0..n)
            .map(|i| {
                if i < self.half {
                    1.0
                } else {
                    (-tail[n - 1 - i]).exp()
                }
            })
            .collect()
    }

    /// One application of `T`.
    pub fn step(&mut self) {
        self.g = self.gamma();
        self.f = self.phi();
        self.steps += 1;
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn interp(&self, v: &[f64], t: f64) -> f64 {
        let x = t / self.h + self.half as f64;
        if x <= 0.0 {
            return v[0];
        }
        let i = x.floor() as usize;
        if i >= v.len() - 1 {
            return v[v.len() - 1];
        }
        let w = x - i as f64;
        v[i] * (1.0 - w) + v[i + 1] * w
    }

    /// Current `G`, linear between grid points.
    pub fn ccdf_m(&self, t: f64) -> f64 {
        if t < 0.0 {
            1.0
        } else {
            self.interp(&self.g, t)
        }
    }

    /// `P(X^m >= t)` under the current `G`.
    pub fn ccdf_m_left(&self, t: f64) -> f64 {
        if t <= 0.0 {
            1.0
        } else {
            self.ccdf_m(t)
        }
    }

    /// `F = φ(G)` for the current `G`.
    pub fn ccdf_o(&self, t: f64) -> f64 {
        self.interp(&self.f, t)
    }

    /// Largest grid discrepancy from the closed-form `G` and `F`.
    pub fn sup_distance(&self, k: &RdeConstants) -> f64 {
        (0..self.g.len())
            .map(|i| {
                let t = self.t(i);
                (self.g[i] - k.ccdf_m(t))
                    .abs()
                    .max((self.f[i] - k.ccdf_o(t)).abs())
            })
            .fold(0.0, f64::max)
    }
}
