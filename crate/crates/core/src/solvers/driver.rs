use std::time::Instant;

use super::steps::{gerk_kernel, rgs_kernel, rk_kernel, rrk_kernel, rsegs_kernel};
use super::{range_defect, Algorithm, SolverConfig, SolverState};
use crate::dense::{householder_qr, norm, sub, DenseMatrix};
use crate::error::{Error, Result};
use crate::experiments::{HistoryRow, IterationHistory, MetricContext};
use crate::problems::FactorizedProblem;
use crate::regularizer::Regularizer;
use crate::sampling::{RngStream, WeightedSampler};

/// Matrices and samplers one algorithm touches.
struct Plan<'a> {
    algorithm: Algorithm,
    f: Regularizer,
    rhs: &'a [f64],
    /// `A` for the factored methods, `C` otherwise.
    outer: &'a DenseMatrix,
    /// `B` for the factored methods.
    inner: Option<&'a DenseMatrix>,
    first: &'a WeightedSampler,
    second: Option<&'a WeightedSampler>,
}

impl<'a> Plan<'a> {
    fn new(
        problem: &'a FactorizedProblem,
        algorithm: Algorithm,
        f: Regularizer,
        c: Option<&'a DenseMatrix>,
    ) -> Result<Self> {
        use Algorithm::*;
        let outer = c.unwrap_or(problem.a());
        let (inner, first, second) = match algorithm {
            Rk | Rrk => (None, outer.row_sampler()?, None),
            Rgs => (None, outer.col_sampler()?, None),
            RkRrk => (
                Some(problem.b()),
                outer.row_sampler()?,
                Some(problem.b().row_sampler()?),
            ),
            RgsRrk => (
                Some(problem.b()),
                outer.col_sampler()?,
                Some(problem.b().row_sampler()?),
            ),
            Gerk | Rsegs => (None, outer.col_sampler()?, Some(outer.row_sampler()?)),
        };
        Ok(Self {
            algorithm,
            f,
            rhs: problem.rhs(),
            outer,
            inner,
            first,
            second,
        })
    }

    #[inline]
    fn step(&self, state: &mut SolverState, rng: &mut RngStream) {
        use Algorithm::*;
        let j = self.first.sample(rng);
        let i = self.second.map(|s| s.sample(rng));
        let (c, f, rhs) = (self.outer, &self.f, self.rhs);
        match (self.algorithm, i) {
            (Rk, _) => state.pair.update_dual(f, |z| rk_kernel(c, rhs, z, j)),
            (Rrk, _) => rrk_kernel(c, rhs[j], &mut state.pair, f, j),
            (Rgs, _) => {
                let r = &mut state.r;
                state.pair.update_dual(f, |z| rgs_kernel(c, z, r, j));
            }
            (RkRrk, Some(i)) => {
                rk_kernel(c, rhs, &mut state.y, j);
                let b = self.inner.expect("factored plan has B");
                rrk_kernel(b, state.y[i], &mut state.pair, f, i);
            }
            (RgsRrk, Some(i)) => {
                rgs_kernel(c, &mut state.y, &mut state.r, j);
                let b = self.inner.expect("factored plan has B");
                rrk_kernel(b, state.y[i], &mut state.pair, f, i);
            }
            (Gerk, Some(i)) => gerk_kernel(c, rhs, state, f, j, i),
            (Rsegs, Some(i)) => rsegs_kernel(c, state, f, j, i),
            _ => unreachable!("two-index algorithms always draw a second index"),
        }
        state.k += 1;
    }

    /// Recomputes the carried residual from scratch.
    fn refresh_residual(&self, state: &mut SolverState) -> Result<()> {
        let y: &[f64] = match self.algorithm {
            Algorithm::Rgs => state.pair.x(),
            Algorithm::RgsRrk | Algorithm::Rsegs => &state.y,
            _ => return Ok(()),
        };
        state.r = sub(self.rhs, &self.outer.matvec(y)?);
        Ok(())
    }
}

fn metrics_row(
    ctx: &MetricContext<'_>,
    problem: &FactorizedProblem,
    f: &Regularizer,
    state: &SolverState,
    elapsed_s: f64,
) -> Result<HistoryRow> {
    Ok(HistoryRow {
        k: state.k,
        rel_residual: ctx.rel_residual(state.x())?,
        rel_error: ctx.rel_error(state.x()),
        bregman: problem.x_star().map(|xs| state.pair.bregman_to(f, xs)),
        elapsed_s,
    })
}

/// Runs `config.maxit` steps of the configured method from the standard
/// starting point, logging at `k = 0`, every `log_every` steps, and at the
/// last step. Full-system methods are charged the time to form `C`.
pub fn run(problem: &FactorizedProblem, config: &SolverConfig) -> Result<IterationHistory> {
    config.validate()?;
    let method = config.method;
    let algorithm = method.algorithm;
    let f = method.regularizer;
    if matches!(algorithm, Algorithm::Rk | Algorithm::Rgs) && f != Regularizer::Quadratic {
        return Err(Error::invalid(format!(
            "{} runs with the quadratic objective only",
            method.name()
        )));
    }

    let ctx = MetricContext::new(problem)?;
    if let Some(z0) = &config.initial_dual {
        if z0.len() != problem.dims().2 {
            return Err(Error::DimensionMismatch {
                op: "initial dual iterate",
                expected: problem.dims().2,
                got: z0.len(),
            });
        }
        let qr = householder_qr(&problem.b().transpose())?;
        let defect = range_defect(&qr, z0);
        if defect > 1e-8 * norm(z0).max(1.0) {
            log::warn!(
                "initial dual iterate is not in ran(Bᵀ) (distance {defect:e}); \
                 convergence guarantees assume it is"
            );
        }
    }

    let mut state = SolverState::initial(problem, &method, config.initial_dual.as_deref())?;
    let (c, setup_s) = if algorithm.on_full_system() {
        let (c, t) = problem.product_timed();
        (Some(c), t)
    } else {
        (None, 0.0)
    };
    let plan = Plan::new(problem, algorithm, f, c).map_err(|e| Error::Step {
        iteration: 1,
        source: Box::new(e),
    })?;
    let mut rng = RngStream::new(config.seed);
    let mut history = IterationHistory::new(method.name(), config.seed, problem.describe());

    let mut elapsed = setup_s;
    let t = Instant::now();
    history.push(metrics_row(&ctx, problem, &f, &state, elapsed)?)?;
    history.add_metric_seconds(t.elapsed().as_secs_f64());

    let refresh = config.residual_refresh_every;
    while state.k < config.maxit {
        let stop = ((state.k / config.log_every + 1) * config.log_every).min(config.maxit);
        let t = Instant::now();
        while state.k < stop {
            plan.step(&mut state, &mut rng);
            if algorithm.tracks_residual() && state.k % refresh == 0 {
                plan.refresh_residual(&mut state).map_err(|e| Error::Step {
                    iteration: state.k,
                    source: Box::new(e),
                })?;
            }
        }
        elapsed += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let row = metrics_row(&ctx, problem, &f, &state, elapsed).map_err(|e| Error::Step {
            iteration: state.k,
            source: Box::new(e),
        })?;
        history.add_metric_seconds(t.elapsed().as_secs_f64());
        let reached = config.tolerance.is_some_and(|tol| row.rel_residual <= tol);
        if !row.rel_residual.is_finite() {
            return Err(Error::Step {
                iteration: state.k,
                source: Box::new(Error::invalid("iterate diverged (non-finite residual)")),
            });
        }
        history.push(row)?;
        if reached {
            break;
        }
    }
    history.set_final_x(state.x().to_vec());
    Ok(history)
}
