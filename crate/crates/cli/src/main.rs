use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use manyone::bp::{bp_solve, IterationStats};
use manyone::experiment::{
    run_compare, run_mc, solve_instance, write_records, CompareConfig, CompareRecord, McConfig,
    Solver, TrialRecord,
};
use manyone::pwit::{pwit_ensemble, PwitConfig, PwitSummary};
use manyone::rde::{
    c_star_integral, endogeny_probe, population_dynamics, EndogenyRow, PoolStart, PopDynRow,
    RdeConstants,
};
use manyone::{gen_instance, BipartiteInstance, Label};

#[derive(Parser)]
#[command(
    name = "manyone",
    version,
    about = "Minimum-cost many-to-one matching experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance in the text format.
    Gen(GenArgs),
    /// Solve one instance and print its trial record.
    Solve(SolveArgs),
    /// Run BP on one instance and print per-iteration diagnostics.
    Bp(BpArgs),
    /// BP against the exact optimum on paired instances.
    Compare(CompareArgs),
    /// Monte Carlo sweep of one solver.
    Mc(McArgs),
    /// Fixed-point constants and the limit cost.
    Rde(RdeArgs),
    /// Population dynamics for the message laws.
    Popdyn(PopdynArgs),
    /// Bivariate pool discrepancy per generation.
    Endogeny(EndogenyArgs),
    /// Root-incoming BP messages on truncated Poisson weighted trees.
    Pwit(PwitArgs),
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Read the instance from this file instead of generating it.
    #[arg(long)]
    input: Option<PathBuf>,
}

impl InstanceArgs {
    fn load(&self) -> Result<BipartiteInstance> {
        match &self.input {
            Some(path) => {
                let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                Ok(BipartiteInstance::read_text(BufReader::new(f))?)
            }
            None => {
                check_positive("n", self.n)?;
                Ok(gen_instance(self.n, self.alpha, self.seed)?)
            }
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value = "exact")]
    solver: Solver,
    /// BP iterations.
    #[arg(long, default_value_t = 50)]
    k: usize,
    /// Write the assignment (`a,b` per line) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BpArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 50)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Comma-separated BP iteration counts.
    #[arg(long, value_delimiter = ',', default_value = "5,10,25,50")]
    k: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// One or more comma-separated sizes.
    #[arg(long, value_delimiter = ',', default_value = "200")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 50)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "exact")]
    solver: Solver,
    /// Trial records go here; the summary goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RdeArgs {
    /// One or more comma-separated values.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    alpha: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PopdynArgs {
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    pool: usize,
    #[arg(long, default_value_t = 64)]
    trunc: usize,
    /// Generations.
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start from samples of the fixed point instead of Exp(1).
    #[arg(long)]
    from_fixed_point: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EndogenyArgs {
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    pool: usize,
    #[arg(long, default_value_t = 64)]
    trunc: usize,
    /// Generations.
    #[arg(long, default_value_t = 40)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PwitArgs {
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Number of trees.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Comma-separated step counts; each must be below the depth.
    #[arg(long, value_delimiter = ',', default_value = "2,4,6,8")]
    k: Vec<usize>,
    #[arg(long, default_value_t = 9)]
    depth: usize,
    #[arg(long, default_value_t = 32)]
    trunc: usize,
    /// Fix the root label (`o` or `m`); sampled from the mixture otherwise.
    #[arg(long)]
    root_label: Option<Label>,
    /// Root children reported per tree.
    #[arg(long, default_value_t = 1)]
    children: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit every message (`k,sender,message`) instead of KS summaries.
    #[arg(long)]
    samples: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn check_positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        bail!("--{name} must be positive");
    }
    Ok(())
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn gen(args: GenArgs) -> Result<()> {
    check_positive("n", args.n)?;
    let inst = gen_instance(args.n, args.alpha, args.seed)?;
    let mut out = sink(args.out.as_deref())?;
    inst.write_text(&mut out)?;
    out.flush()?;
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let inst = args.instance.load()?;
    if args.solver == Solver::Bp {
        check_positive("k", args.k)?;
    }
    let rec = solve_instance(&inst, args.solver, args.k)?;
    if let Some(path) = &args.out {
        let mm = match args.solver {
            Solver::Brute => manyone::exact::brute_force(&inst)?.0,
            Solver::Exact => manyone::exact::reduction_solve_compact(&inst)?.0,
            Solver::Bp => bp_solve(&inst, args.k)?.matching,
        };
        let mut out = sink(Some(path))?;
        writeln!(out, "a,b")?;
        for (a, b) in mm.assign().iter().enumerate() {
            writeln!(out, "{a},{b}")?;
        }
        out.flush()?;
    }
    println!("{}\n{}", TrialRecord::CSV_HEADER, rec.csv_row());
    Ok(())
}

fn bp(args: BpArgs) -> Result<()> {
    check_positive("k", args.k)?;
    let inst = args.instance.load()?;
    let outcome = bp_solve(&inst, args.k)?;
    let mut out = sink(args.out.as_deref())?;
    writeln!(out, "{}", IterationStats::CSV_HEADER)?;
    for it in &outcome.iterations {
        writeln!(out, "{}", it.csv_row())?;
    }
    out.flush()?;
    eprintln!(
        "cost {} (cost/n {}), uncovered before repair {}, repair moves {}",
        outcome.cost,
        outcome.cost / inst.n() as f64,
        outcome.repair.uncovered_before,
        outcome.repair.moves.len()
    );
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let rows = run_compare(&CompareConfig {
        alpha: args.alpha,
        n: args.n,
        trials: args.trials,
        seed: args.seed,
        ks: args.k,
    })?;
    let mut out = sink(args.out.as_deref())?;
    writeln!(out, "{}", CompareRecord::CSV_HEADER)?;
    for r in &rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    out.flush()?;
    Ok(())
}

fn mc(args: McArgs) -> Result<()> {
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for &n in &args.n {
        let (recs, s) = run_mc(&McConfig {
            alpha: args.alpha,
            n,
            trials: args.trials,
            seed: args.seed,
            solver: args.solver,
            k: args.k,
        })?;
        records.extend(recs);
        summaries.push((n, s));
    }
    match &args.out {
        Some(path) => write_records(sink(Some(path))?, &records)?,
        None => {
            write_records(io::stdout().lock(), &records)?;
            println!();
        }
    }
    println!("n,{}", manyone::experiment::McSummary::CSV_HEADER);
    for (n, s) in &summaries {
        println!("{n},{}", s.csv_row());
    }
    Ok(())
}

fn rde(args: RdeArgs) -> Result<()> {
    let mut out = sink(args.out.as_deref())?;
    writeln!(out, "alpha,w_o,gamma,c_star,c_star_integral")?;
    for &alpha in &args.alpha {
        let k = RdeConstants::new(alpha)?;
        let integral = c_star_integral(alpha)?;
        writeln!(
            out,
            "{alpha},{},{},{},{integral}",
            k.w_o(),
            k.gamma(),
            k.c_star()
        )?;
    }
    out.flush()?;
    Ok(())
}

fn popdyn(args: PopdynArgs) -> Result<()> {
    check_positive("pool", args.pool)?;
    let k = RdeConstants::new(args.alpha)?;
    let start = if args.from_fixed_point {
        PoolStart::FixedPoint
    } else {
        PoolStart::Exponential
    };
    let rows = population_dynamics(&k, start, args.pool, args.k, args.trunc, args.seed)?;
    let mut out = sink(args.out.as_deref())?;
    writeln!(out, "{}", PopDynRow::CSV_HEADER)?;
    for r in &rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    out.flush()?;
    Ok(())
}

fn endogeny(args: EndogenyArgs) -> Result<()> {
    check_positive("pool", args.pool)?;
    let k = RdeConstants::new(args.alpha)?;
    let rows = endogeny_probe(&k, args.pool, args.k, args.trunc, args.seed)?;
    let mut out = sink(args.out.as_deref())?;
    writeln!(out, "{}", EndogenyRow::CSV_HEADER)?;
    for r in &rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    out.flush()?;
    Ok(())
}

fn pwit(args: PwitArgs) -> Result<()> {
    check_positive("trials", args.trials)?;
    let cfg = PwitConfig::new(args.alpha, args.depth, args.trunc)?.with_root_label(args.root_label);
    let summaries = pwit_ensemble(&cfg, args.trials, &args.k, args.children, args.seed)?;
    let mut out = sink(args.out.as_deref())?;
    if args.samples {
        writeln!(out, "k,sender,message")?;
        for s in &summaries {
            for x in &s.from_o {
                writeln!(out, "{},o,{x}", s.k)?;
            }
            for x in &s.from_m {
                writeln!(out, "{},m,{x}", s.k)?;
            }
        }
    } else {
        writeln!(out, "{}", PwitSummary::CSV_HEADER)?;
        for s in &summaries {
            writeln!(out, "{}", s.csv_row())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Bp(a) => bp(a),
        Command::Compare(a) => compare(a),
        Command::Mc(a) => mc(a),
        Command::Rde(a) => rde(a),
        Command::Popdyn(a) => popdyn(a),
        Command::Endogeny(a) => endogeny(a),
        Command::Pwit(a) => pwit(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
