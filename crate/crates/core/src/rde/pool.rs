//! Population dynamics for the two-step equation.
//!
//! A pool of `N` samples stands for a law. One application of `T` draws,
//! for every output slot, the first `P` points of a rate-1 Poisson process
//! and `P` uniformly chosen input samples, then takes the inner and outer
//! minimum. Output chunks use their own random streams keyed by a per-step
//! seed, so results do not depend on thread scheduling.

use rand::RngCore;
use rayon::prelude::*;

use super::constants::RdeConstants;
use crate::error::{Error, Result};
use crate::graph::Label;
use crate::rng::RngStream;
use crate::stats::{ks_distance, mean_stderr};

pub const DEFAULT_TRUNC: usize = 64;
pub const MIN_TRUNC: usize = 16;
const MAX_TRUNC: usize = 1 << 14;
/// Largest tolerated share of minima attained in the second half of the
/// truncated process before `P` is doubled.
const LATE_FRACTION: f64 = 1e-3;
const CHUNK: usize = 2048;

/// Empirical law of `X^o` or `X^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePool {
    samples: Vec<f64>,
    generation: usize,
    side: Label,
}

impl SamplePool {
    pub fn new(side: Label, samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter("pool must be nonempty".into()));
        }
        if samples
            .iter()
            .any(|x| x.is_nan() || (side == Label::Many && *x < 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "invalid sample in {side}-pool"
            )));
        }
        Ok(Self {
            samples,
            generation: 0,
            side,
        })
    }

    /// `n` draws from `F` (o-side) or `G` (m-side).
    pub fn from_law(k: &RdeConstants, side: Label, n: usize, rng: &mut RngStream) -> Result<Self> {
        let samples = (0..n)
            .map(|_| match side {
                Label::One => k.sample_o(rng),
                Label::Many => k.sample_m(rng),
            })
            .collect();
        Self::new(side, samples)
    }

    /// `n` draws from Exp(1), an m-side starting point away from `G`.
    pub fn exponential(n: usize, rng: &mut RngStream) -> Result<Self> {
        Self::new(Label::Many, (0..n).map(|_| rng.exp1()).collect())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn side(&self) -> Label {
        self.side
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// KS distance to `F` or `G` according to the side.
    pub fn ks_to_fixed_point(&self, k: &RdeConstants) -> f64 {
        match self.side {
            Label::One => ks_distance(&self.samples, |t| k.ccdf_o(t), |t| k.ccdf_o(t)),
            Label::Many => ks_distance(&self.samples, |t| k.ccdf_m(t), |t| k.ccdf_m_left(t)),
        }
    }
}

/// What a pool step actually used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    /// Truncation `P` after any doubling.
    pub trunc: usize,
    /// Share of minima attained at index `>= P/2` in the accepted pass.
    pub late_fraction: f64,
}

/// One half of the two-step map. `scale` multiplies the Poisson points
/// (`α` into an o-vertex, 1 into an m-vertex); `clip` applies `(·)^+`.
#[derive(Clone, Copy)]
struct Half {
    scale: f64,
    clip: bool,
}

fn half_for(k: &RdeConstants, target: Label) -> Half {
    match target {
        Label::One => Half {
            scale: k.alpha(),
            clip: false,
        },
        Label::Many => Half {
            scale: 1.0,
            clip: true,
        },
    }
}

/// Minimum over the first `trunc` points of `scale * ξ_j - input[I_j]`.
/// Returns the value (clipped if asked) and whether the minimum came late.
#[inline]
fn one_min(
    input: &[f64],
    input_max: f64,
    h: Half,
    trunc: usize,
    rng: &mut RngStream,
) -> (f64, bool) {
    let mut xi = 0.0;
    let mut best = f64::INFINITY;
    let mut arg = 0;
    for j in 0..trunc {
        xi += rng.exp1();
        let floor = h.scale * xi - input_max;
        if floor >= best || (h.clip && best <= 0.0) {
            break;
        }
        let v = h.scale * xi - input[rng.index(input.len())];
        if v < best {
            best = v;
            arg = j;
        }
    }
    let late = arg >= trunc / 2 && !(h.clip && best <= 0.0);
    (if h.clip { best.max(0.0) } else { best }, late)
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn half_step(input: &[f64], h: Half, trunc: usize, key: u64, out: &mut [f64]) -> usize {
    let input_max = max_of(input);
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut rng = RngStream::new(key, c as u64);
            let mut late = 0;
            for slot in chunk.iter_mut() {
                let (v, l) = one_min(input, input_max, h, trunc, &mut rng);
                *slot = v;
                late += l as usize;
            }
            late
        })
        .sum()
}

fn check_trunc(trunc: usize) -> Result<()> {
    if trunc < MIN_TRUNC {
        return Err(Error::InvalidParameter(format!(
            "truncation must be at least {MIN_TRUNC}, got {trunc}"
        )));
    }
    Ok(())
}

/// Runs `pass(P)` and doubles `P` until the late-minimum share is small.
fn with_doubling<T>(
    trunc: usize,
    mut pass: impl FnMut(usize) -> (T, f64),
) -> Result<(T, StepReport)> {
    check_trunc(trunc)?;
    let mut p = trunc;
    loop {
        let (out, late_fraction) = pass(p);
        if late_fraction <= LATE_FRACTION {
            return Ok((
                out,
                StepReport {
                    trunc: p,
                    late_fraction,
                },
            ));
        }
        if p >= MAX_TRUNC {
            return Err(Error::InvalidParameter(format!(
                "truncation reached {p} with late-minimum share {late_fraction}"
            )));
        }
        p *= 2;
    }
}

/// One application of `T`: m-pool to o-pool to m-pool.
pub fn t_step(
    pool: &SamplePool,
    k: &RdeConstants,
    trunc: usize,
    rng: &mut RngStream,
) -> Result<(SamplePool, StepReport)> {
    if pool.side != Label::Many {
        return Err(Error::InvalidParameter(
            "t_step takes an m-side pool".into(),
        ));
    }
    let (k1, k2) = (rng.next_u64(), rng.next_u64());
    let n = pool.len();
    let mut o = vec![0.0; n];
    let mut m = vec![0.0; n];
    let ((), report) = with_doubling(trunc, |p| {
        let late = half_step(&pool.samples, half_for(k, Label::One), p, k1, &mut o)
            + half_step(&o, half_for(k, Label::Many), p, k2, &mut m);
        ((), late as f64 / (2 * n) as f64)
    })?;
    Ok((
        SamplePool {
            samples: m,
            generation: pool.generation + 1,
            side: Label::Many,
        },
        report,
    ))
}

/// One half-step into `target`, for use by callers that want the
/// intermediate pool.
pub fn half_t_step(
    pool: &SamplePool,
    k: &RdeConstants,
    trunc: usize,
    rng: &mut RngStream,
) -> Result<(SamplePool, StepReport)> {
    let target = pool.side.flip();
    let key = rng.next_u64();
    let mut out = vec![0.0; pool.len()];
    let ((), report) = with_doubling(trunc, |p| {
        let late = half_step(&pool.samples, half_for(k, target), p, key, &mut out);
        ((), late as f64 / pool.len() as f64)
    })?;
    Ok((
        SamplePool {
            samples: out,
            generation: pool.generation + usize::from(target == Label::Many),
            side: target,
        },
        report,
    ))
}

/// Pairs `(X⁽¹⁾, X⁽²⁾)` on the o-side, driven by shared randomness.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariatePool {
    pairs: Vec<[f64; 2]>,
    generation: usize,
}

impl BivariatePool {
    /// Independent `F` draws in each coordinate.
    pub fn independent(k: &RdeConstants, n: usize, rng: &mut RngStream) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("pool must be nonempty".into()));
        }
        Ok(Self {
            pairs: (0..n).map(|_| [k.sample_o(rng), k.sample_o(rng)]).collect(),
            generation: 0,
        })
    }

    pub fn from_pairs(pairs: Vec<[f64; 2]>) -> Result<Self> {
        if pairs.is_empty() || pairs.iter().flatten().any(|x| x.is_nan()) {
            return Err(Error::InvalidParameter(
                "pairs must be nonempty and not NaN".into(),
            ));
        }
        Ok(Self {
            pairs,
            generation: 0,
        })
    }

    pub fn pairs(&self) -> &[[f64; 2]] {
        &self.pairs
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `δ = mean |X⁽¹⁾ - X⁽²⁾|` and its standard error.
    pub fn discrepancy(&self) -> (f64, f64) {
        let d: Vec<f64> = self.pairs.iter().map(|p| (p[0] - p[1]).abs()).collect();
        mean_stderr(&d)
    }

    pub fn coordinate(&self, c: usize) -> Vec<f64> {
        self.pairs.iter().map(|p| p[c]).collect()
    }
}

#[inline]
fn pair_min(
    input: &[[f64; 2]],
    input_max: f64,
    h: Half,
    trunc: usize,
    rng: &mut RngStream,
) -> ([f64; 2], bool) {
    let mut xi = 0.0;
    let mut best = [f64::INFINITY; 2];
    let mut arg = [0usize; 2];
    for j in 0..trunc {
        xi += rng.exp1();
        let floor = h.scale * xi - input_max;
        let done = |b: f64| floor >= b || (h.clip && b <= 0.0);
        if done(best[0]) && done(best[1]) {
            break;
        }
        let x = input[rng.index(input.len())];
        for c in 0..2 {
            let v = h.scale * xi - x[c];
            if v < best[c] {
                best[c] = v;
                arg[c] = j;
            }
        }
    }
    let late = (0..2).any(|c| arg[c] >= trunc / 2 && !(h.clip && best[c] <= 0.0));
    if h.clip {
        best = best.map(|b| b.max(0.0));
    }
    (best, late)
}

fn pair_half_step(
    input: &[[f64; 2]],
    h: Half,
    trunc: usize,
    key: u64,
    out: &mut [[f64; 2]],
) -> usize {
    let input_max = input
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut rng = RngStream::new(key, c as u64);
            let mut late = 0;
            for slot in chunk.iter_mut() {
                let (v, l) = pair_min(input, input_max, h, trunc, &mut rng);
                *slot = v;
                late += l as usize;
            }
            late
        })
        .sum()
}

/// Both coordinates through o → m → o with shared Poisson points and
/// shared input indices.
pub fn bivariate_step(
    pool: &BivariatePool,
    k: &RdeConstants,
    trunc: usize,
    rng: &mut RngStream,
) -> Result<(BivariatePool, StepReport)> {
    let (k1, k2) = (rng.next_u64(), rng.next_u64());
    let n = pool.len();
    let mut m = vec![[0.0; 2]; n];
    let mut o = vec![[0.0; 2]; n];
    let ((), report) = with_doubling(trunc, |p| {
        let late = pair_half_step(&pool.pairs, half_for(k, Label::Many), p, k1, &mut m)
            + pair_half_step(&m, half_for(k, Label::One), p, k2, &mut o);
        ((), late as f64 / (2 * n) as f64)
    })?;
    Ok((
        BivariatePool {
            pairs: o,
            generation: pool.generation + 1,
        },
        report,
    ))
}

/// Starting law for [`population_dynamics`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoolStart {
    /// Samples of `G` itself.
    FixedPoint,
    /// Exp(1) samples.
    Exponential,
}

/// One generation of a population-dynamics run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopDynRow {
    pub generation: usize,
    pub ks_to_g: f64,
    pub trunc: usize,
    pub late_fraction: f64,
}

impl PopDynRow {
    pub const CSV_HEADER: &'static str = "generation,ks_to_g,trunc,late_fraction";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.generation, self.ks_to_g, self.trunc, self.late_fraction
        )
    }
}

/// Iterates `T` from `start` for `steps` generations, recording the KS
/// distance to `G` after each (row 0 is the starting pool).
pub fn population_dynamics(
    k: &RdeConstants,
    start: PoolStart,
    n: usize,
    steps: usize,
    trunc: usize,
    seed: u64,
) -> Result<Vec<PopDynRow>> {
    let mut rng = RngStream::new(seed, crate::rng::streams::POOL);
    let mut pool = match start {
        PoolStart::FixedPoint => SamplePool::from_law(k, Label::Many, n, &mut rng)?,
        PoolStart::Exponential => SamplePool::exponential(n, &mut rng)?,
    };
    let mut rows = vec![PopDynRow {
        generation: 0,
        ks_to_g: pool.ks_to_fixed_point(k),
        trunc,
        late_fraction: 0.0,
    }];
    let mut p = trunc;
    for _ in 0..steps {
        let (next, report) = t_step(&pool, k, p, &mut rng)?;
        pool = next;
        p = report.trunc;
        rows.push(PopDynRow {
            generation: pool.generation(),
            ks_to_g: pool.ks_to_fixed_point(k),
            trunc: report.trunc,
            late_fraction: report.late_fraction,
        });
    }
    Ok(rows)
}

/// One generation of the endogeny probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndogenyRow {
    pub generation: usize,
    pub delta: f64,
    pub stderr: f64,
    pub trunc: usize,
}

impl EndogenyRow {
    pub const CSV_HEADER: &'static str = "generation,delta,stderr,trunc";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.generation, self.delta, self.stderr, self.trunc
        )
    }
}

/// Runs the bivariate pool from independent `F × F` pairs and records
/// `δ_k` for `k = 0..=steps`.
pub fn endogeny_probe(
    k: &RdeConstants,
    n: usize,
    steps: usize,
    trunc: usize,
    seed: u64,
) -> Result<Vec<EndogenyRow>> {
    let mut rng = RngStream::new(seed, crate::rng::streams::BIVARIATE);
    let mut pool = BivariatePool::independent(k, n, &mut rng)?;
    let (d, s) = pool.discrepancy();
    let mut rows = vec![EndogenyRow {
        generation: 0,
        delta: d,
        stderr: s,
        trunc,
    }];
    let mut p = trunc;
    for _ in 0..steps {
        let (next, report) = bivariate_step(&pool, k, p, &mut rng)?;
        pool = next;
        p = report.trunc;
        let (d, s) = pool.discrepancy();
        rows.push(EndogenyRow {
            generation: pool.generation(),
            delta: d,
            stderr: s,
            trunc: p,
        });
    }
    Ok(rows)
}

/// True when no row exceeds an earlier one by more than twice their
/// combined standard error.
pub fn decreasing_within_noise(rows: &[EndogenyRow]) -> bool {
    rows.windows(2).all(|w| {
        let slack = 2.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        w[1].delta <= w[0].delta + slack
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> RdeConstants {
        RdeConstants::new(2.0).unwrap()
    }

    /// Plain evaluation of all `P` terms, no early exit.
    fn full_min(input: &[f64], h: Half, trunc: usize, rng: &mut RngStream) -> f64 {
        let mut xi = 0.0;
        let mut best = f64::INFINITY;
        for _ in 0..trunc {
            xi += rng.exp1();
            let v = h.scale * xi - input[rng.index(input.len())];
            best = best.min(v);
        }
        if h.clip {
            best.max(0.0)
        } else {
            best
        }
    }

    #[test]
    fn early_exit_does_not_change_the_minimum() {
        let k = consts();
        let mut src = RngStream::new(3, 0);
        let m_pool: Vec<f64> = (0..500).map(|_| k.sample_m(&mut src)).collect();
        let o_pool: Vec<f64> = (0..500).map(|_| k.sample_o(&mut src)).collect();
        for (input, h) in [
            (&m_pool, half_for(&k, Label::One)),
            (&o_pool, half_for(&k, Label::Many)),
        ] {
            let max = max_of(input);
            for s in 0..2000 {
                // Same stream: the early-exit path consumes a prefix of the
                // draws the full evaluation uses.
                let fast = one_min(input, max, h, 64, &mut RngStream::new(s, 9)).0;
                let slow = full_min(input, h, 64, &mut RngStream::new(s, 9));
                assert_eq!(fast, slow);
            }
        }
    }

    #[test]
    fn samplers_match_closed_forms() {
        let k = consts();
        let mut rng = RngStream::new(10, 0);
        let n = 1_000_000;
        let o = SamplePool::from_law(&k, Label::One, n, &mut rng).unwrap();
        let m = SamplePool::from_law(&k, Label::Many, n, &mut rng).unwrap();
        assert!(o.ks_to_fixed_point(&k) < 0.002);
        assert!(m.ks_to_fixed_point(&k) < 0.002);
        assert!(m.samples().iter().all(|&x| x >= 0.0));
        let above = o.samples().iter().filter(|&&x| x > 0.0).count() as f64 / n as f64;
        assert!((above - k.ccdf_o(0.0)).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn zero_input_gives_scaled_first_point() {
        let k = consts();
        let pool = SamplePool::new(Label::Many, vec![0.0; 20_000]).unwrap();
        let mut rng = RngStream::new(4, 0);
        let (o, _) = half_t_step(&pool, &k, 64, &mut rng).unwrap();
        assert_eq!(o.side(), Label::One);
        // min_i α ξ_i = α ξ_1 ~ α Exp(1).
        let ks = ks_distance(
            o.samples(),
            |t| (-t / 2.0).exp().min(1.0),
            |t| (-t / 2.0).exp().min(1.0),
        );
        assert!(ks < 0.015);
        let (m, _) = t_step(&pool, &k, 64, &mut rng).unwrap();
        assert!(m.samples().iter().all(|&x| x >= 0.0));
        assert_eq!(m.generation(), 1);
    }

    #[test]
    fn step_is_deterministic_and_checks_inputs() {
        let k = consts();
        let pool = SamplePool::from_law(&k, Label::Many, 5000, &mut RngStream::new(1, 1)).unwrap();
        let a = t_step(&pool, &k, 64, &mut RngStream::new(2, 2)).unwrap();
        let b = t_step(&pool, &k, 64, &mut RngStream::new(2, 2)).unwrap();
        assert_eq!(a, b);
        assert!(t_step(&pool, &k, 8, &mut RngStream::new(2, 2)).is_err());
        let o = SamplePool::new(Label::One, vec![1.0]).unwrap();
        assert!(t_step(&o, &k, 64, &mut RngStream::new(2, 2)).is_err());
        assert!(SamplePool::new(Label::Many, vec![-1.0]).is_err());
    }

    #[test]
    fn small_truncation_is_doubled() {
        // One input in twenty is huge, so the minimizing index is roughly
        // geometric with mean 20 and often beyond P/2 = 8.
        let k = consts();
        let samples = (0..20_000)
            .map(|i| if i % 20 == 0 { 1000.0 } else { 0.0 })
            .collect();
        let pool = SamplePool::new(Label::Many, samples).unwrap();
        let (_, report) = half_t_step(&pool, &k, 16, &mut RngStream::new(6, 0)).unwrap();
        assert!(report.trunc >= 256, "{report:?}");
        assert!(report.late_fraction <= LATE_FRACTION);
    }

    #[test]
    fn diagonal_pairs_stay_diagonal() {
        let k = consts();
        let mut rng = RngStream::new(8, 0);
        let xs: Vec<[f64; 2]> = (0..10_000)
            .map(|_| {
                let x = k.sample_o(&mut rng);
                [x, x]
            })
            .collect();
        let pool = BivariatePool::from_pairs(xs).unwrap();
        let (next, _) = bivariate_step(&pool, &k, 64, &mut rng).unwrap();
        assert!(next.pairs().iter().all(|p| p[0] == p[1]));
        assert_eq!(next.discrepancy().0, 0.0);
    }

    #[test]
    fn bivariate_marginals_stay_at_f() {
        let k = consts();
        let mut rng = RngStream::new(12, 0);
        let mut pool = BivariatePool::independent(&k, 50_000, &mut rng).unwrap();
        for _ in 0..3 {
            pool = bivariate_step(&pool, &k, 64, &mut rng).unwrap().0;
        }
        for c in 0..2 {
            let ks = ks_distance(&pool.coordinate(c), |t| k.ccdf_o(t), |t| k.ccdf_o(t));
            assert!(ks < 0.015, "coordinate {c}: {ks}");
        }
    }

    #[test]
    fn noise_tolerant_monotonicity() {
        let row = |d, s| EndogenyRow {
            generation: 0,
            delta: d,
            stderr: s,
            trunc: 64,
        };
        assert!(decreasing_within_noise(&[
            row(1.0, 0.01),
            row(1.02, 0.01),
            row(0.5, 0.01)
        ]));
        assert!(!decreasing_within_noise(&[row(1.0, 0.01), row(1.1, 0.01)]));
    }
}
