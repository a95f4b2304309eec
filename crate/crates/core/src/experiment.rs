//! Seeded Monte Carlo sweeps over random instances.
//!
//! Trial `i` of a sweep with seed `s` draws its instance from
//! `trial_seed(s, i)`, so any sub-range of trials can be rerun on its own
//! and reproduces the corresponding rows. Trials run in parallel and are
//! reported in trial order.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::bp::bp_solve;
use crate::error::{check_alpha, Error, Result};
use crate::exact::{brute_force, reduction_solve_compact};
use crate::graph::{gen_instance, BipartiteInstance};
use crate::rde::c_star;
use crate::rng::trial_seed;
use crate::stats::mean_stderr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    Brute,
    Exact,
    Bp,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Brute => "brute",
            Solver::Exact => "exact",
            Solver::Bp => "bp",
        })
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Solver::Brute),
            "exact" => Ok(Solver::Exact),
            "bp" => Ok(Solver::Bp),
            _ => Err(Error::InvalidParameter(format!(
                "unknown solver {s:?}, expected brute, exact or bp"
            ))),
        }
    }
}

/// One solved instance.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub alpha: f64,
    /// Seed the instance was generated from.
    pub seed: u64,
    pub solver: Solver,
    pub k: Option<usize>,
    pub cost: f64,
    pub cost_over_n: f64,
    pub runtime_ms: f64,
    pub uncovered_before_repair: Option<usize>,
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl TrialRecord {
    pub const CSV_HEADER: &'static str =
        "n,alpha,seed,solver,k,cost,cost_over_n,runtime_ms,uncovered_before_repair";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.3},{}",
            self.n,
            self.alpha,
            self.seed,
            self.solver,
            opt(self.k),
            self.cost,
            self.cost_over_n,
            self.runtime_ms,
            opt(self.uncovered_before_repair)
        )
    }
}

/// Solves `inst` with `solver`; `k` is the BP iteration count.
pub fn solve_instance(inst: &BipartiteInstance, solver: Solver, k: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let (cost, k, uncovered) = match solver {
        Solver::Brute => (brute_force(inst)?.1, None, None),
        Solver::Exact => (reduction_solve_compact(inst)?.1, None, None),
        Solver::Bp => {
            let out = bp_solve(inst, k)?;
            (out.cost, Some(k), Some(out.repair.uncovered_before))
        }
    };
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(TrialRecord {
        n: inst.n(),
        alpha: inst.alpha(),
        seed: inst.seed(),
        solver,
        k,
        cost,
        cost_over_n: cost / inst.n() as f64,
        runtime_ms,
        uncovered_before_repair: uncovered,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    pub alpha: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub solver: Solver,
    /// BP iterations; ignored by the other solvers.
    pub k: usize,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.n == 0 || self.trials == 0 {
            return Err(Error::InvalidParameter(
                "n and trials must be positive".into(),
            ));
        }
        if self.solver == Solver::Bp && self.k == 0 {
            return Err(Error::InvalidParameter("bp needs k >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McSummary {
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
    pub c_star: f64,
    /// `|mean - c_star|`.
    pub gap: f64,
}

impl McSummary {
    pub const CSV_HEADER: &'static str = "trials,mean_cost_over_n,stderr,c_star,abs_diff";

    pub fn from_records(records: &[TrialRecord], alpha: f64) -> Result<Self> {
        let xs: Vec<f64> = records.iter().map(|r| r.cost_over_n).collect();
        let (mean, stderr) = mean_stderr(&xs);
        let c = c_star(alpha)?;
        Ok(Self {
            trials: xs.len(),
            mean,
            stderr,
            c_star: c,
            gap: (mean - c).abs(),
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.trials, self.mean, self.stderr, self.c_star, self.gap
        )
    }
}

/// Runs every trial of the sweep. The first failing trial aborts it.
pub fn run_mc(cfg: &McConfig) -> Result<(Vec<TrialRecord>, McSummary)> {
    cfg.validate()?;
    let records: Vec<TrialRecord> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let inst = gen_instance(cfg.n, cfg.alpha, trial_seed(cfg.seed, t))?;
            solve_instance(&inst, cfg.solver, cfg.k)
        })
        .collect::<Result<_>>()?;
    let summary = McSummary::from_records(&records, cfg.alpha)?;
    Ok((records, summary))
}

pub fn write_records<W: Write>(mut out: W, records: &[TrialRecord]) -> Result<()> {
    writeln!(out, "{}", TrialRecord::CSV_HEADER)?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// BP against the exact optimum on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareRecord {
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub k: usize,
    pub bp_cost: f64,
    pub exact_cost: f64,
    /// `bp_cost / exact_cost`.
    pub ratio: f64,
    pub uncovered_before_repair: usize,
}

impl CompareRecord {
    pub const CSV_HEADER: &'static str =
        "n,alpha,seed,k,bp_cost,exact_cost,ratio,uncovered_before_repair";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.alpha,
            self.seed,
            self.k,
            self.bp_cost,
            self.exact_cost,
            self.ratio,
            self.uncovered_before_repair
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareConfig {
    pub alpha: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub ks: Vec<usize>,
}

/// For each trial instance, the exact optimum and BP with each `k`. Rows
/// are ordered by trial, then by `k` as given.
pub fn run_compare(cfg: &CompareConfig) -> Result<Vec<CompareRecord>> {
    check_alpha(cfg.alpha)?;
    if cfg.n == 0 || cfg.trials == 0 || cfg.ks.is_empty() || cfg.ks.contains(&0) {
        return Err(Error::InvalidParameter(
            "n, trials and every k must be positive, with at least one k".into(),
        ));
    }
    let per_trial: Vec<Vec<CompareRecord>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let inst = gen_instance(cfg.n, cfg.alpha, trial_seed(cfg.seed, t))?;
            let exact = reduction_solve_compact(&inst)?.1;
            cfg.ks
                .iter()
                .map(|&k| {
                    let out = bp_solve(&inst, k)?;
                    Ok(CompareRecord {
                        n: cfg.n,
                        alpha: cfg.alpha,
                        seed: inst.seed(),
                        k,
                        bp_cost: out.cost,
                        exact_cost: exact,
                        ratio: out.cost / exact,
                        uncovered_before_repair: out.repair.uncovered_before,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// Mean ratio per `k`, in the order of `ks`.
pub fn mean_ratio_by_k(records: &[CompareRecord], ks: &[usize]) -> Vec<(usize, f64)> {
    ks.iter()
        .map(|&k| {
            let xs: Vec<f64> = records
                .iter()
                .filter(|r| r.k == k)
                .map(|r| r.ratio)
                .collect();
            (k, mean_stderr(&xs).0)
        })
        .collect()
}
