use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use rrk_core::dense::write_vector_csv;
use rrk_core::experiments::{
    reproduce, run_trials, write_history_csv, write_spread_csv, write_tidy_csv, AveragedHistory,
    Example, ReproduceOptions, Scale, DEFAULT_TRIAL_SEED,
};
use rrk_core::problems::{
    factorized_pair_from_data, gen_gaussian, load_csv_dataset, load_problem, save_problem,
    sniff_delimiter, wine_target, DatasetOptions, FactorizedProblem,
};
use rrk_core::solvers::{Algorithm, DEFAULT_LOG_EVERY};
use rrk_core::theory::{
    bound_table, bound_table_csv, lhs_consistent, lhs_inconsistent, min_norm_reference,
    RateConstants,
};
use rrk_core::{Method, Regularizer, RngStream, SolverConfig};

#[derive(Parser)]
#[command(
    name = "rrk",
    version,
    about = "Randomized Kaczmarz / Gauss-Seidel solvers for A·B·x = b"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Gaussian factorized problem with a sparse ground truth.
    Gen(GenArgs),
    /// Factorize the wine-quality data and write consistent/ and inconsistent/ problems.
    IngestWine(IngestArgs),
    /// Run one method on a saved problem, averaged over trials.
    Solve(SolveArgs),
    /// Rerun one of the numerical examples.
    Reproduce(ReproduceArgs),
    /// Print rate constants and the expectation bound table.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    l: usize,
    #[arg(long)]
    n: usize,
    /// Nonzeros in x★.
    #[arg(long)]
    s: usize,
    /// `--consistent` (the default) or `--consistent false`.
    #[arg(long, action = ArgAction::Set, default_value_t = true, num_args = 0..=1, default_missing_value = "true")]
    consistent: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, default_value_t = 5)]
    rank: usize,
    #[arg(long, default_value_t = 200)]
    nmf_iters: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Field delimiter; detected from the header when omitted.
    #[arg(long)]
    delimiter: Option<char>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegArg {
    Quadratic,
    L1,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: PathBuf,
    /// rk, rgs, rrk, rsk, rk-rk, rk-rsk, rgs-rk, rgs-rsk, gerk, rsegs. Defaults to
    /// rk-rsk for consistent problems and rgs-rsk otherwise.
    #[arg(long)]
    alg: Option<String>,
    #[arg(long, value_enum)]
    reg: Option<RegArg>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Iteration budget: an integer, or a multiple of m such as `20m`.
    #[arg(long, default_value = "20m")]
    maxit: String,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_TRIAL_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_LOG_EVERY)]
    log_every: usize,
    /// Stop once the relative residual falls to this value.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// example1-consistent, example1-inconsistent, example2-consistent or
    /// example2-inconsistent.
    example: Example,
    #[arg(long, default_value = "desk")]
    scale: Scale,
    #[arg(long)]
    wine_csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed of the solver trials.
    #[arg(long, default_value_t = DEFAULT_TRIAL_SEED)]
    seed: u64,
    /// Seed for problem generation or NMF initialization.
    #[arg(long, default_value_t = 1)]
    problem_seed: u64,
    #[arg(long)]
    maxit: Option<String>,
    #[arg(long, default_value_t = DEFAULT_LOG_EVERY)]
    log_every: usize,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    problem: PathBuf,
    /// One of rk-rk, rk-rsk, rgs-rk, rgs-rsk (or rk-rrk / rgs-rrk with --reg).
    #[arg(long)]
    alg: String,
    #[arg(long, value_enum)]
    reg: Option<RegArg>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Defaults to γ(1/ρ − 1)/2.
    #[arg(long)]
    delta: Option<f64>,
    /// Required for the elastic-net objective.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,10,50,100,200,500,1000,2000,5000"
    )]
    ks: Vec<usize>,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::IngestWine(a) => ingest_wine(a),
        Command::Solve(a) => solve(a),
        Command::Reproduce(a) => run_reproduce(a),
        Command::Bounds(a) => bounds(a),
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let p = gen_gaussian(
        a.m,
        a.l,
        a.n,
        a.s,
        a.consistent,
        &mut RngStream::new(a.seed),
    )?;
    save_problem(&p, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    println!("{} -> {}", p.describe(), a.out.display());
    Ok(())
}

fn ingest_wine(a: IngestArgs) -> Result<()> {
    let delimiter = match a.delimiter {
        Some(c) if c.is_ascii() => c as u8,
        Some(c) => bail!("delimiter must be a single ASCII character, got {c:?}"),
        None => sniff_delimiter(&a.csv)?,
    };
    let data = load_csv_dataset(&a.csv, &DatasetOptions::wine(delimiter))?;
    let x_star = wine_target();
    if data.cols() != x_star.len() {
        bail!(
            "{}: expected {} property columns after dropping the label, found {}",
            a.csv.display(),
            x_star.len(),
            data.cols()
        );
    }
    let mut rng = RngStream::new(a.seed);
    let (consistent, inconsistent) =
        factorized_pair_from_data(&data, a.rank, a.nmf_iters, x_star, &mut rng, "wine")?;
    for (p, sub) in [(&consistent, "consistent"), (&inconsistent, "inconsistent")] {
        let dir = a.out.join(sub);
        save_problem(p, &dir).with_context(|| format!("writing {}", dir.display()))?;
        println!("{} -> {}", p.describe(), dir.display());
    }
    Ok(())
}

/// `"4000"` or `"20m"`, the latter scaled by the row count.
fn parse_budget(text: &str, m: usize) -> Result<usize> {
    let text = text.trim();
    if let Some(factor) = text.strip_suffix('m') {
        let factor: usize = factor
            .parse()
            .with_context(|| format!("bad iteration budget {text:?}"))?;
        return Ok(factor * m);
    }
    text.parse()
        .with_context(|| format!("bad iteration budget {text:?}; expected an integer or e.g. 20m"))
}

fn regularizer(reg: Option<RegArg>, lambda: f64) -> Result<Option<Regularizer>> {
    Ok(match reg {
        None => None,
        Some(RegArg::Quadratic) => Some(Regularizer::Quadratic),
        Some(RegArg::L1) => Some(Regularizer::elastic_net(lambda)?),
    })
}

fn resolve_method(tag: &str, reg: Option<RegArg>, lambda: f64) -> Result<Method> {
    let mut method = Method::from_tag(tag, regularizer(reg, lambda)?)?;
    if let Regularizer::ElasticNetL1 { .. } = method.regularizer {
        method.regularizer = Regularizer::elastic_net(lambda)?;
    }
    Ok(method)
}

fn load(dir: &Path) -> Result<FactorizedProblem> {
    load_problem(dir).with_context(|| format!("loading problem from {}", dir.display()))
}

fn write_histories(out: &Path, hists: &[&AveragedHistory]) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_history_csv(out.join("history.csv"), hists)?;
    write_tidy_csv(out.join("tidy.csv"), hists)?;
    write_spread_csv(out.join("spread.csv"), hists)?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into())
}

fn solve(a: SolveArgs) -> Result<()> {
    let problem = load(&a.problem)?;
    let tag = match &a.alg {
        Some(t) => t.as_str(),
        None if problem.consistent() => "rk-rsk",
        None => "rgs-rsk",
    };
    let method = resolve_method(tag, a.reg, a.lambda)?;
    let maxit = parse_budget(&a.maxit, problem.dims().0)?;
    let mut config = SolverConfig::new(method, maxit, a.seed).log_every(a.log_every);
    config.tolerance = a.tolerance;
    let avg = run_trials(&problem, &config, a.trials)?;

    let last = avg.last().context("empty history")?;
    println!("problem     {}", problem.describe());
    println!("algorithm   {} ({})", avg.algorithm, method);
    println!(
        "trials      {} (seeds {}..{})",
        a.trials,
        a.seed,
        a.seed + a.trials as u64 - 1
    );
    println!("iterations  {}", last.k);
    println!("rel_residual {:.3e}", last.rel_residual.mean);
    println!("rel_error   {}", fmt_opt(last.rel_error.map(|s| s.mean)));
    println!("bregman     {}", fmt_opt(last.bregman.map(|s| s.mean)));
    println!("s/iteration {}", fmt_opt(avg.seconds_per_iteration()));

    if let Some(out) = &a.out {
        write_histories(out, &[&avg])?;
        write_vector_csv(out.join("final_x.csv"), &avg.mean_final_iterate())?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn run_reproduce(a: ReproduceArgs) -> Result<()> {
    let mut opts = ReproduceOptions::new(a.example, a.scale);
    opts.wine_csv = a.wine_csv;
    opts.out = a.out;
    opts.trials = a.trials;
    opts.seed = a.seed;
    opts.problem_seed = a.problem_seed;
    opts.log_every = a.log_every;
    if let Some(budget) = &a.maxit {
        // the row count is needed for "10m"-style budgets
        let m = rrk_core::experiments::build_problem(&opts)?.dims().0;
        opts.maxit = Some(parse_budget(budget, m)?);
    }
    let report = reproduce(&opts)?;
    print!("{}", report.summary);
    if let Some(out) = &opts.out {
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn bounds(a: BoundsArgs) -> Result<()> {
    let problem = load(&a.problem)?;
    let method = resolve_method(&a.alg, a.reg, a.lambda)?;
    let f = method.regularizer;
    let (pa, pb, rhs) = (problem.a(), problem.b(), problem.rhs());
    let lhs = match method.algorithm {
        Algorithm::RkRrk => lhs_consistent(pa, rhs)?,
        Algorithm::RgsRrk => lhs_inconsistent(pa, rhs)?,
        _ => bail!(
            "bounds cover the factored methods only (rk-rk, rk-rsk, rgs-rk, rgs-rsk), got {}",
            a.alg
        ),
    };
    if method.algorithm == Algorithm::RkRrk && !problem.consistent() {
        log::warn!("the RK-based bound assumes a consistent system; this problem is not");
    }
    let consts = RateConstants::from_factors(pa, pb, &f, a.nu, a.delta)?;
    let target = match f {
        Regularizer::Quadratic => min_norm_reference(pa, pb, rhs)?,
        _ => problem
            .x_star()
            .context("the elastic-net bound needs the problem's xstar.csv as the solution")?
            .to_vec(),
    };
    // z⁽⁰⁾ = 0
    let d0 = f.bregman_distance(&vec![0.0; target.len()], &target);
    let table = bound_table(&consts, d0, lhs, pb.frob_sq(), f.gamma(), &a.ks)?;

    println!("# {} on {}", method, problem.describe());
    println!("# alpha = {:.6e}", consts.alpha);
    println!("# beta  = {:.6e}", consts.beta);
    println!("# rho   = {:.6e}", consts.rho);
    println!("# nu    = {:.6e}", consts.nu);
    println!("# delta = {:.6e}", consts.delta);
    println!("# D0    = {d0:.6e}");
    print!("{}", bound_table_csv(&table));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budgets() {
        assert_eq!(parse_budget("4000", 200).unwrap(), 4000);
        assert_eq!(parse_budget("20m", 200).unwrap(), 4000);
        assert_eq!(parse_budget("10m", 1599).unwrap(), 15990);
        assert!(parse_budget("m", 10).is_err());
        assert!(parse_budget("ten", 10).is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
