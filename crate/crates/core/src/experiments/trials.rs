use rayon::prelude::*;

use super::history::{AveragedHistory, IterationHistory};
use crate::error::{Error, Result};
use crate::problems::FactorizedProblem;
use crate::solvers::{run, SolverConfig};

/// Seed of trial `t` for base seed `base`.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add(trial as u64)
}

/// Runs trial `t` with seed `config.seed + t`, for `t` in `0..trials`, in
/// parallel. Results are gathered in trial order, so the average does not
/// depend on scheduling.
pub fn run_trials_raw(
    problem: &FactorizedProblem,
    config: &SolverConfig,
    trials: usize,
) -> Result<Vec<IterationHistory>> {
    if trials == 0 {
        return Err(Error::invalid("trial count must be >= 1"));
    }
    if config.method.algorithm.on_full_system() {
        // form C once, before the workers race for it
        problem.product();
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let cfg = config.clone().seed(trial_seed(config.seed, t));
            run(problem, &cfg).map_err(|e| Error::Trial {
                trial: t,
                source: Box::new(e),
            })
        })
        .collect()
}

pub fn run_trials(
    problem: &FactorizedProblem,
    config: &SolverConfig,
    trials: usize,
) -> Result<AveragedHistory> {
    let runs = run_trials_raw(problem, config, trials)?;
    AveragedHistory::from_runs(&runs, config.seed)
}
