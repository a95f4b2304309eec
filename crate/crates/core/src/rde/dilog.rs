//! Real dilogarithm on the non-positive half line.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `Li₂(z) = Σ z^k / k²` for `z <= 0`.
///
/// Uses the power series on `[-1/2, 0]`, the Landen identity
/// `Li₂(z) = -Li₂(z/(z-1)) - ½ln²(1-z)` on `[-1, -1/2)` and the inversion
/// `Li₂(z) = -Li₂(1/z) - π²/6 - ½ln²(-z)` below `-1`.
pub fn dilog(z: f64) -> Result<f64> {
    if z.is_nan() || z > 0.0 {
        return Err(Error::DilogDomain(z));
    }
    Ok(dilog_nonpositive(z))
}

fn dilog_nonpositive(z: f64) -> f64 {
    if z == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if z >= -0.5 {
        series(z)
    } else if z >= -1.0 {
        let l = (-z).ln_1p();
        -series(z / (z - 1.0)) - 0.5 * l * l
    } else {
        let l = (-z).ln();
        -dilog_nonpositive(1.0 / z) - PI * PI / 6.0 - 0.5 * l * l
    }
}

/// Power series for `|z| <= 1/2`.
fn series(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = 1.0;
    for k in 1..200 {
        pow *= z;
        let term = pow / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rde::quad::integrate;

    /// `-∫_0^z ln(1-t)/t dt`, straight from the definition.
    fn dilog_by_quadrature(z: f64) -> f64 {
        integrate(
            |t: f64| if t == 0.0 { 1.0 } else { -(-t).ln_1p() / t },
            0.0,
            z,
            1e-13,
        )
        .unwrap()
        .value
    }

    #[test]
    fn zero_and_domain() {
        assert_eq!(dilog(0.0).unwrap(), 0.0);
        assert!(matches!(dilog(0.1), Err(Error::DilogDomain(_))));
        assert!(dilog(f64::NAN).is_err());
    }

    #[test]
    fn minus_one_matches_alternating_sum() {
        // Pairwise partial sums; the tail after 2N terms is below 1/(2N)^2.
        let mut s = 0.0;
        for k in (1..=2_000_000u64).rev() {
            let t = 1.0 / (k as f64 * k as f64);
            s += if k % 2 == 1 { -t } else { t };
        }
        assert!((dilog(-1.0).unwrap() - s).abs() < 1e-12);
        assert!((dilog(-1.0).unwrap() + PI * PI / 12.0).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_integral_definition() {
        for z in [-0.2, -0.5, -0.75, -1.5, -3.0, -10.0, -123.0] {
            let q = dilog_by_quadrature(z);
            let d = dilog(z).unwrap();
            assert!((d - q).abs() < 1e-12, "z = {z}: {d} vs {q}");
        }
    }

    #[test]
    fn continuous_across_branch_points() {
        for b in [-0.5f64, -1.0] {
            let lo = dilog(b - 1e-12).unwrap();
            let hi = dilog(b + 1e-12).unwrap();
            assert!((lo - hi).abs() < 1e-11);
        }
    }

    #[test]
    fn large_argument_asymptotics() {
        // Li₂(-x) ≈ -π²/6 - ½ln²x for large x.
        let x = 1e12f64;
        let approx = -PI * PI / 6.0 - 0.5 * x.ln().powi(2);
        assert!((dilog(-x).unwrap() - approx).abs() < 1e-10);
    }
}
