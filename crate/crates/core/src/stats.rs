//! Summary statistics shared by the Monte Carlo drivers.

/// Sample mean and standard error of the mean. The standard error is 0 for
/// fewer than two values.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and
/// a law given by its complementary CDF `ccdf(t) = P(X > t)` and left limit
/// `ccdf_left(t) = P(X >= t)`. Atoms are handled exactly.
pub fn ks_distance<C, L>(samples: &[f64], ccdf: C, ccdf_left: L) -> f64
where
    C: Fn(f64) -> f64,
    L: Fn(f64) -> f64,
{
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    ks_distance_sorted(&xs, ccdf, ccdf_left)
}

/// [`ks_distance`] for samples already sorted ascending.
pub fn ks_distance_sorted<C, L>(xs: &[f64], ccdf: C, ccdf_left: L) -> f64
where
    C: Fn(f64) -> f64,
    L: Fn(f64) -> f64,
{
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        // Empirical CDF jumps from i/n to j/n at x.
        let cdf = 1.0 - ccdf(x);
        let cdf_left = 1.0 - ccdf_left(x);
        d = d
            .max((j as f64 / n - cdf).abs())
            .max((cdf_left - i as f64 / n).abs());
        i = j;
    }
    d
}

/// Standard deviation of the KS statistic for `n` samples from a
/// continuous law, about `0.26 / sqrt(n)`.
pub fn ks_sd(n: usize) -> f64 {
    0.2605 / (n as f64).sqrt()
}

/// Whether a sequence of KS distances, each from `n` samples, decreases up
/// to sampling noise: no step rises by more than two standard deviations
/// of the difference, and the last value is below the first.
pub fn ks_decreasing_within_noise(ks: &[f64], n: usize) -> bool {
    let slack = 2.0 * 2f64.sqrt() * ks_sd(n);
    ks.windows(2).all(|w| w[1] <= w[0] + slack) && (ks.len() < 2 || ks[ks.len() - 1] < ks[0])
}
