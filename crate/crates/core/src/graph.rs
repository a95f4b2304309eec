//! Problem instances on the complete bipartite graph `K_{n,m}` and
//! many-to-one matchings over them.
//!
//! Side A (the "one" side) has `n` vertices, side B (the "many" side) has
//! `m = ceil(n / alpha)` vertices. A many-to-one matching is a total map
//! A -> B; it is feasible when the map is onto.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{check_alpha, Error, Result};
use crate::rng::{streams, RngStream};

/// Vertex label: `One` for side A (degree exactly 1 in a many-to-one
/// matching), `Many` for side B (degree at least 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    One,
    Many,
}

impl Label {
    pub fn flip(self) -> Self {
        match self {
            Label::One => Label::Many,
            Label::Many => Label::One,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Label::One => "o",
            Label::Many => "m",
        })
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "o" | "one" => Ok(Label::One),
            "m" | "many" => Ok(Label::Many),
            other => Err(Error::InvalidParameter(format!(
                "label must be `o` or `m`, got {other:?}"
            ))),
        }
    }
}

/// Smallest integer `m` with `n / alpha <= m`.
///
/// The float quotient is only a first guess; the result is adjusted until
/// `alpha * (m - 1) < n <= alpha * m` holds for the products as computed.
pub fn many_side_size(n: usize, alpha: f64) -> Result<usize> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let nf = n as f64;
    let mut m = (nf / alpha).ceil().max(1.0) as usize;
    while m > 1 && alpha * ((m - 1) as f64) >= nf {
        m -= 1;
    }
    while alpha * (m as f64) < nf {
        m += 1;
    }
    Ok(m.min(n))
}

/// Edge-weight law hook. Only the exponential law ships.
pub trait WeightLaw {
    fn sample(&self, rng: &mut RngStream) -> f64;
}

/// Exponential distribution with the given mean, sampled by inversion.
#[derive(Clone, Copy, Debug)]
pub struct Exponential {
    pub mean: f64,
}

impl WeightLaw for Exponential {
    fn sample(&self, rng: &mut RngStream) -> f64 {
        self.mean * rng.exp1()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteInstance {
    n: usize,
    m: usize,
    alpha: f64,
    seed: u64,
    /// Row-major `n x m`; entry `(a, b)` is the weight of edge `{a, b}`.
    weights: Vec<f64>,
}

impl BipartiteInstance {
    /// Builds an instance from explicit weights. `m` must equal
    /// `ceil(n / alpha)`.
    pub fn from_weights(
        n: usize,
        m: usize,
        alpha: f64,
        seed: u64,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let expected = many_side_size(n, alpha)?;
        if m != expected {
            return Err(Error::DimensionMismatch(format!(
                "m = {m} but ceil(n / alpha) = {expected}"
            )));
        }
        Self::from_raw(n, m, alpha, seed, weights)
    }

    /// Builds an `n x m` instance without tying `m` to `alpha`.
    ///
    /// The nominal `alpha` is recorded as `n / m`. Useful for hand-written
    /// fixtures such as `n = m = 2`.
    pub fn from_matrix(n: usize, m: usize, weights: Vec<f64>) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::DimensionMismatch(format!(
                "need 1 <= m <= n, got n = {n}, m = {m}"
            )));
        }
        Self::from_raw(n, m, n as f64 / m as f64, 0, weights)
    }

    fn from_raw(n: usize, m: usize, alpha: f64, seed: u64, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n * m {
            return Err(Error::DimensionMismatch(format!(
                "expected {} weights, got {}",
                n * m,
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "weights must be finite and >= 0, found {w}"
            )));
        }
        Ok(Self {
            n,
            m,
            alpha,
            seed,
            weights,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.weights[a * self.m + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.weights[a * self.m..(a + 1) * self.m]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same instance with every weight multiplied by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            weights: self.weights.iter().map(|w| w * c).collect(),
            ..self.clone()
        }
    }

    /// Per-row minimum weight and its lowest-index argmin.
    pub fn row_min(&self, a: usize) -> (usize, f64) {
        argmin(self.row(a))
    }

    /// Writes the text format: a header line `n m alpha seed`, then `n`
    /// lines of `m` weights with 17 significant digits.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {} {} {}", self.n, self.m, self.alpha, self.seed)?;
        let mut line = String::new();
        for a in 0..self.n {
            line.clear();
            for (j, w) in self.row(a).iter().enumerate() {
                if j > 0 {
                    line.push(' ');
                }
                write!(line, "{w:.16e}").expect("writing to a String cannot fail");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty input".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "header must be `n m alpha seed`, got {header:?}"
            )));
        }
        let parse_err = |what: &str, s: &str| Error::Parse(format!("bad {what}: {s:?}"));
        let n: usize = fields[0].parse().map_err(|_| parse_err("n", fields[0]))?;
        let m: usize = fields[1].parse().map_err(|_| parse_err("m", fields[1]))?;
        let alpha: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err("alpha", fields[2]))?;
        let seed: u64 = fields[3]
            .parse()
            .map_err(|_| parse_err("seed", fields[3]))?;
        let mut weights = Vec::with_capacity(n * m);
        for row in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing row {row}")))??;
            let before = weights.len();
            for tok in line.split_whitespace() {
                weights.push(tok.parse::<f64>().map_err(|_| parse_err("weight", tok))?);
            }
            if weights.len() - before != m {
                return Err(Error::Parse(format!(
                    "row {row} has {} entries, expected {m}",
                    weights.len() - before
                )));
            }
        }
        // Hand-built fixtures (e.g. n = m) carry alpha = n / m, so only the
        // shape is checked here, not m == ceil(n / alpha).
        if m == 0 || m > n {
            return Err(Error::Parse(format!("need 1 <= m <= n, got {n} x {m}")));
        }
        Self::from_raw(n, m, alpha, seed, weights)
    }
}

/// Lowest-index argmin of a nonempty slice.
pub(crate) fn argmin(xs: &[f64]) -> (usize, f64) {
    let mut best = 0;
    let mut val = xs[0];
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x < val {
            best = i;
            val = x;
        }
    }
    (best, val)
}

/// Random instance on `K_{n, ceil(n/alpha)}` with i.i.d. exponential weights
/// of mean `n`.
pub fn gen_instance(n: usize, alpha: f64, seed: u64) -> Result<BipartiteInstance> {
    gen_instance_with(n, alpha, seed, &Exponential { mean: n as f64 })
}

pub fn gen_instance_with<L: WeightLaw>(
    n: usize,
    alpha: f64,
    seed: u64,
    law: &L,
) -> Result<BipartiteInstance> {
    let m = many_side_size(n, alpha)?;
    let mut rng = RngStream::new(seed, streams::WEIGHTS);
    let weights = (0..n * m).map(|_| law.sample(&mut rng)).collect();
    BipartiteInstance::from_raw(n, m, alpha, seed, weights)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManyToOneMatching {
    assign: Vec<usize>,
    bdegree: Vec<usize>,
}

impl ManyToOneMatching {
    /// `assign[a]` is the B-partner of A-vertex `a`; every entry must be `< m`.
    pub fn new(assign: Vec<usize>, m: usize) -> Result<Self> {
        let mut bdegree = vec![0; m];
        for (a, &b) in assign.iter().enumerate() {
            if b >= m {
                return Err(Error::DimensionMismatch(format!(
                    "assign[{a}] = {b} out of range for m = {m}"
                )));
            }
            bdegree[b] += 1;
        }
        Ok(Self { assign, bdegree })
    }

    pub fn assign(&self) -> &[usize] {
        &self.assign
    }

    pub fn bdegree(&self) -> &[usize] {
        &self.bdegree
    }

    pub fn partner(&self, a: usize) -> usize {
        self.assign[a]
    }

    pub fn n(&self) -> usize {
        self.assign.len()
    }

    pub fn m(&self) -> usize {
        self.bdegree.len()
    }

    /// Moves A-vertex `a` to partner `b`, keeping degrees in sync.
    pub fn reassign(&mut self, a: usize, b: usize) {
        let old = self.assign[a];
        self.bdegree[old] -= 1;
        self.bdegree[b] += 1;
        self.assign[a] = b;
    }

    /// B vertices with no partner, ascending.
    pub fn uncovered(&self) -> Vec<usize> {
        self.bdegree
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(b, _)| b)
            .collect()
    }
}

fn check_dims(inst: &BipartiteInstance, mm: &ManyToOneMatching) -> Result<()> {
    if mm.n() != inst.n() || mm.m() != inst.m() {
        return Err(Error::DimensionMismatch(format!(
            "matching is {}x{}, instance is {}x{}",
            mm.n(),
            mm.m(),
            inst.n(),
            inst.m()
        )));
    }
    Ok(())
}

/// Sum of the weights of the edges `{a, assign[a]}`. Feasibility is not
/// required.
pub fn matching_cost(inst: &BipartiteInstance, mm: &ManyToOneMatching) -> Result<f64> {
    check_dims(inst, mm)?;
    Ok(mm
        .assign()
        .iter()
        .enumerate()
        .map(|(a, &b)| inst.weight(a, b))
        .sum())
}

pub fn is_feasible(inst: &BipartiteInstance, mm: &ManyToOneMatching) -> bool {
    if check_dims(inst, mm).is_err() {
        return false;
    }
    let mut recount = vec![0usize; mm.m()];
    for &b in mm.assign() {
        recount[b] += 1;
    }
    recount == mm.bdegree() && recount.iter().all(|&d| d >= 1)
}
