//! End-to-end reruns of the two numerical examples: synthetic Gaussian
//! factorized systems, and the wine-quality data factorized by NMF.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::history::{write_history_csv, write_spread_csv, write_tidy_csv, AveragedHistory};
use super::trials::run_trials;
use crate::dense::{write_matrix_csv, DenseMatrix};
use crate::error::{Error, Result};
use crate::problems::{
    factorized_pair_from_data, gen_gaussian, load_csv_dataset, save_problem, sniff_delimiter,
    wine_target, DatasetOptions, FactorizedProblem, DEFAULT_NMF_SWEEPS, WINE_RANK,
};
use crate::regularizer::Regularizer;
use crate::sampling::RngStream;
use crate::solvers::{Method, SolverConfig, DEFAULT_LOG_EVERY};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Example {
    Example1Consistent,
    Example1Inconsistent,
    Example2Consistent,
    Example2Inconsistent,
}

impl Example {
    pub const ALL: [Example; 4] = [
        Example::Example1Consistent,
        Example::Example1Inconsistent,
        Example::Example2Consistent,
        Example::Example2Inconsistent,
    ];

    pub fn consistent(self) -> bool {
        matches!(
            self,
            Example::Example1Consistent | Example::Example2Consistent
        )
    }

    pub fn uses_wine(self) -> bool {
        matches!(
            self,
            Example::Example2Consistent | Example::Example2Inconsistent
        )
    }

    /// Baseline first, then the sparse method it is compared against.
    pub fn methods(self) -> [&'static str; 2] {
        match self {
            Example::Example1Consistent => ["rk-rk", "rk-rsk"],
            Example::Example1Inconsistent => ["rgs-rk", "rgs-rsk"],
            Example::Example2Consistent => ["rsk", "rk-rsk"],
            Example::Example2Inconsistent => ["gerk", "rgs-rsk"],
        }
    }

    /// Iteration budget as a multiple of `m`.
    pub fn budget_factor(self) -> usize {
        if self.uses_wine() {
            10
        } else {
            20
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Example::Example1Consistent => "example1-consistent",
            Example::Example1Inconsistent => "example1-inconsistent",
            Example::Example2Consistent => "example2-consistent",
            Example::Example2Inconsistent => "example2-inconsistent",
        }
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Example::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown example {s:?}; expected one of example1-consistent, \
                     example1-inconsistent, example2-consistent, example2-inconsistent"
                ))
            })
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Paper,
}

impl Scale {
    /// `(m, ℓ, n, s)` for the Gaussian example.
    pub fn gaussian_dims(self) -> (usize, usize, usize, usize) {
        match self {
            Scale::Desk => (200, 50, 100, 5),
            Scale::Paper => (10_000, 2_500, 5_000, 20),
        }
    }

    pub fn trials(self) -> usize {
        match self {
            Scale::Desk => 20,
            Scale::Paper => 50,
        }
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(Error::invalid(format!(
                "unknown scale {other:?}; expected desk or paper"
            ))),
        }
    }
}

/// `λ` used by every sparse method in both examples.
pub const EXAMPLE_LAMBDA: f64 = 1.0;

/// Default base seed of the solver trials. Kept away from the small problem
/// seeds so that no trial replays the generator's stream.
pub const DEFAULT_TRIAL_SEED: u64 = 1000;

#[derive(Clone, Debug)]
pub struct ReproduceOptions {
    pub example: Example,
    pub scale: Scale,
    pub wine_csv: Option<PathBuf>,
    /// Output directory; nothing is written when absent.
    pub out: Option<PathBuf>,
    /// Seed for problem generation / NMF initialization.
    pub problem_seed: u64,
    /// Base seed for the solver trials.
    pub seed: u64,
    pub trials: Option<usize>,
    pub log_every: usize,
    pub maxit: Option<usize>,
}

impl ReproduceOptions {
    pub fn new(example: Example, scale: Scale) -> Self {
        Self {
            example,
            scale,
            wine_csv: None,
            out: None,
            problem_seed: 1,
            seed: DEFAULT_TRIAL_SEED,
            trials: None,
            log_every: DEFAULT_LOG_EVERY,
            maxit: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReproduceReport {
    pub example: Example,
    pub problem: FactorizedProblem,
    pub maxit: usize,
    /// Baseline first, sparse method second.
    pub results: Vec<AveragedHistory>,
    pub summary: String,
}

/// Builds the consistent or inconsistent wine problem: the data matrix minus
/// its label column, NMF at rank 5, and the 3-sparse all-ones target.
pub fn wine_problem(csv: &Path, consistent: bool, seed: u64) -> Result<FactorizedProblem> {
    let data = load_csv_dataset(csv, &DatasetOptions::wine(sniff_delimiter(csv)?))?;
    if data.cols() != wine_target().len() {
        return Err(Error::invalid(format!(
            "{}: expected 11 property columns after dropping the label, found {}",
            csv.display(),
            data.cols()
        )));
    }
    let mut rng = RngStream::new(seed);
    let (c, i) = factorized_pair_from_data(
        &data,
        WINE_RANK,
        DEFAULT_NMF_SWEEPS,
        wine_target(),
        &mut rng,
        "wine",
    )?;
    Ok(if consistent { c } else { i })
}

pub fn build_problem(opts: &ReproduceOptions) -> Result<FactorizedProblem> {
    let ex = opts.example;
    if ex.uses_wine() {
        let csv = opts.wine_csv.as_deref().ok_or_else(|| {
            Error::invalid(format!("{ex} needs the wine-quality CSV (--wine-csv)"))
        })?;
        wine_problem(csv, ex.consistent(), opts.problem_seed)
    } else {
        let (m, l, n, s) = opts.scale.gaussian_dims();
        gen_gaussian(
            m,
            l,
            n,
            s,
            ex.consistent(),
            &mut RngStream::new(opts.problem_seed),
        )
    }
}

pub fn reproduce(opts: &ReproduceOptions) -> Result<ReproduceReport> {
    let problem = build_problem(opts)?;
    let (m, _, _) = problem.dims();
    let maxit = opts.maxit.unwrap_or(opts.example.budget_factor() * m);
    let trials = opts.trials.unwrap_or(opts.scale.trials());
    let lambda = Regularizer::elastic_net(EXAMPLE_LAMBDA)?;

    let mut results = Vec::with_capacity(2);
    for tag in opts.example.methods() {
        let mut method = Method::from_tag(tag, None)?;
        if matches!(method.regularizer, Regularizer::ElasticNetL1 { .. }) {
            method.regularizer = lambda;
        }
        let cfg = SolverConfig::new(method, maxit, opts.seed).log_every(opts.log_every);
        log::info!("{}: running {} x{trials}", opts.example, method.name());
        results.push(run_trials(&problem, &cfg, trials)?);
    }
    let summary = summary_table(opts.example, &problem, maxit, &results);

    if let Some(out) = &opts.out {
        write_outputs(out, &problem, &results, &summary)?;
    }
    Ok(ReproduceReport {
        example: opts.example,
        problem,
        maxit,
        results,
        summary,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into())
}

pub fn summary_table(
    example: Example,
    problem: &FactorizedProblem,
    maxit: usize,
    results: &[AveragedHistory],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{example}: {} maxit={maxit}", problem.describe());
    let _ = writeln!(
        s,
        "{:<12} {:>6} {:>14} {:>14} {:>14} {:>12}",
        "algorithm", "trials", "rel_residual", "rel_error", "median_error", "s/iter"
    );
    for h in results {
        let last = h.last();
        let _ = writeln!(
            s,
            "{:<12} {:>6} {:>14} {:>14} {:>14} {:>12}",
            h.algorithm,
            h.trial_count,
            fmt_opt(last.map(|r| r.rel_residual.mean)),
            fmt_opt(last.and_then(|r| r.rel_error.map(|e| e.mean))),
            fmt_opt(h.median_final_error()),
            fmt_opt(h.seconds_per_iteration()),
        );
    }
    s
}

fn write_outputs(
    out: &Path,
    problem: &FactorizedProblem,
    results: &[AveragedHistory],
    summary: &str,
) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let refs: Vec<&AveragedHistory> = results.iter().collect();
    write_history_csv(out.join("history.csv"), &refs)?;
    write_tidy_csv(out.join("tidy.csv"), &refs)?;
    write_spread_csv(out.join("spread.csv"), &refs)?;

    // final iterates: column 0 is x★ (when known), then one column per
    // algorithm holding the mean final iterate
    let n = problem.dims().2;
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut header = Vec::new();
    if let Some(xs) = problem.x_star() {
        header.push("x_star".to_string());
        cols.push(xs.to_vec());
    }
    for h in results {
        header.push(h.algorithm.clone());
        cols.push(h.mean_final_iterate());
    }
    let m = DenseMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])?;
    let path = out.join("final_iterates.csv");
    write_matrix_csv(&path, &m)?;
    let header_path = out.join("final_iterates.columns");
    std::fs::write(&header_path, header.join(",") + "\n")
        .map_err(|e| Error::io(&header_path, e))?;

    save_problem(problem, out.join("problem"))?;
    let summary_path = out.join("summary.txt");
    std::fs::write(&summary_path, summary).map_err(|e| Error::io(&summary_path, e))
}
