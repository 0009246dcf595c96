//! Randomized row/column-action solvers for `A·B·x = b` and their
//! full-system counterparts on `C = A·B`.
//!
//! | tag                 | system  | inner loop                                   |
//! |---------------------|---------|----------------------------------------------|
//! | `rk`                | `C`     | Kaczmarz on `C·x = b`                        |
//! | `rgs`               | `C`     | Gauss–Seidel on `min ‖b − C·x‖`              |
//! | `rrk`, `rsk`        | `C`     | regularized Kaczmarz on `C·x = b`            |
//! | `rk-rrk`            | `A`,`B` | RK on `A·y = b`, then RRK on `B·x = y`       |
//! | `rgs-rrk`           | `A`,`B` | RGS on `min ‖b − A·y‖`, then RRK on `B·x = y` |
//! | `gerk`              | `C`     | RK on `Cᵀ·y = 0`, then RSK on `C·x = b − y`  |
//! | `rsegs`             | `C`     | RGS on `min ‖b − C·y‖`, then RSK on `C·x = C·y` |
//!
//! `rk-rk`/`rgs-rk` fix the quadratic objective, `rk-rsk`/`rgs-rsk` the
//! elastic-net one.

mod driver;
mod steps;

use std::fmt;
use std::str::FromStr;

pub use self::driver::run;
pub use self::steps::{
    gerk_step, gerk_update, rgs_rrk_step, rgs_rrk_update, rgs_step, rgs_update, rk_rrk_step,
    rk_rrk_update, rk_step, rk_update, rrk_step, rrk_update, rsegs_step, rsegs_update,
};

use crate::dense::{norm, sub, HouseholderQr};
use crate::error::{Error, Result};
use crate::problems::FactorizedProblem;
use crate::regularizer::{BregmanPair, Regularizer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Rk,
    Rgs,
    Rrk,
    RkRrk,
    RgsRrk,
    Gerk,
    Rsegs,
}

impl Algorithm {
    /// Whether the method iterates on the materialized product `C`.
    pub fn on_full_system(self) -> bool {
        !matches!(self, Algorithm::RkRrk | Algorithm::RgsRrk)
    }

    /// Whether the method carries a residual `r = b − A·y` (or `b − C·y`).
    pub fn tracks_residual(self) -> bool {
        matches!(self, Algorithm::Rgs | Algorithm::RgsRrk | Algorithm::Rsegs)
    }

    /// Name used in histories and summary tables.
    pub fn display_name(self, f: &Regularizer) -> &'static str {
        let sparse = matches!(f, Regularizer::ElasticNetL1 { .. });
        match (self, sparse) {
            (Algorithm::Rk, _) => "RK",
            (Algorithm::Rgs, _) => "RGS",
            (Algorithm::Rrk, false) => "RRK",
            (Algorithm::Rrk, true) => "RSK",
            (Algorithm::RkRrk, false) => "RK-RK",
            (Algorithm::RkRrk, true) => "RK-RSK",
            (Algorithm::RgsRrk, false) => "RGS-RK",
            (Algorithm::RgsRrk, true) => "RGS-RSK",
            (Algorithm::Gerk, _) => "GERK-(a,d)",
            (Algorithm::Rsegs, _) => "RSEGS",
        }
    }
}

/// What a CLI tag pins down about the objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RegRule {
    Quadratic,
    Sparse,
    Any,
}

/// An algorithm paired with the objective it runs under.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Method {
    pub algorithm: Algorithm,
    pub regularizer: Regularizer,
}

impl Method {
    pub fn new(algorithm: Algorithm, regularizer: Regularizer) -> Self {
        Self {
            algorithm,
            regularizer,
        }
    }

    /// Resolves a tag (`rk`, `rgs`, `rrk`, `rsk`, `rk-rk`, `rk-rsk`,
    /// `rk-rrk`, `rgs-rk`, `rgs-rsk`, `rgs-rrk`, `gerk`, `rsegs`).
    ///
    /// Tags that fix the objective reject a conflicting `reg`. Sparse tags
    /// default to `λ = 1`; `rrk`-style tags default to the quadratic.
    pub fn from_tag(tag: &str, reg: Option<Regularizer>) -> Result<Self> {
        use Algorithm::*;
        let (algorithm, rule) = match tag.to_ascii_lowercase().as_str() {
            "rk" => (Rk, RegRule::Quadratic),
            "rgs" => (Rgs, RegRule::Quadratic),
            "rrk" => (Rrk, RegRule::Any),
            "rsk" => (Rrk, RegRule::Sparse),
            "rk-rk" => (RkRrk, RegRule::Quadratic),
            "rk-rsk" => (RkRrk, RegRule::Sparse),
            "rk-rrk" => (RkRrk, RegRule::Any),
            "rgs-rk" => (RgsRrk, RegRule::Quadratic),
            "rgs-rsk" => (RgsRrk, RegRule::Sparse),
            "rgs-rrk" => (RgsRrk, RegRule::Any),
            "gerk" => (Gerk, RegRule::Sparse),
            "rsegs" => (Rsegs, RegRule::Sparse),
            other => {
                return Err(Error::invalid(format!(
                    "unknown algorithm tag {other:?}; expected one of rk, rgs, rrk, rsk, rk-rk, \
                     rk-rsk, rk-rrk, rgs-rk, rgs-rsk, rgs-rrk, gerk, rsegs"
                )))
            }
        };
        let regularizer = match (rule, reg) {
            (RegRule::Quadratic, None | Some(Regularizer::Quadratic)) => Regularizer::Quadratic,
            (RegRule::Sparse, None) => Regularizer::ElasticNetL1 { lambda: 1.0 },
            (RegRule::Sparse, Some(r @ Regularizer::ElasticNetL1 { .. })) => r,
            (RegRule::Any, None) => Regularizer::Quadratic,
            (RegRule::Any, Some(r)) => r,
            (_, Some(r)) => {
                return Err(Error::invalid(format!(
                    "algorithm {tag:?} does not run with regularizer {r}"
                )))
            }
        };
        Ok(Self::new(algorithm, regularizer))
    }

    pub fn name(&self) -> &'static str {
        self.algorithm.display_name(&self.regularizer)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::from_tag(s, None)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const DEFAULT_RESIDUAL_REFRESH: usize = 10_000;
pub const DEFAULT_LOG_EVERY: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Number of steps. Zero yields the initial-point metrics only.
    pub maxit: usize,
    pub seed: u64,
    pub log_every: usize,
    /// Stride for recomputing the residual from scratch (RGS family).
    pub residual_refresh_every: usize,
    /// Stop once the logged relative residual drops to this value.
    pub tolerance: Option<f64>,
    /// `z⁽⁰⁾`; zero when absent.
    pub initial_dual: Option<Vec<f64>>,
}

impl SolverConfig {
    pub fn new(method: Method, maxit: usize, seed: u64) -> Self {
        Self {
            method,
            maxit,
            seed,
            log_every: DEFAULT_LOG_EVERY,
            residual_refresh_every: DEFAULT_RESIDUAL_REFRESH,
            tolerance: None,
            initial_dual: None,
        }
    }

    pub fn log_every(mut self, stride: usize) -> Self {
        self.log_every = stride;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.log_every == 0 || self.residual_refresh_every == 0 {
            return Err(Error::invalid("logging and refresh strides must be >= 1"));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid(format!(
                    "tolerance must be positive, got {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Live iterates shared by all algorithms.
///
/// `y` is the auxiliary iterate (`ℝ^ℓ` for the factored methods, `ℝ^m` for
/// GERK, `ℝⁿ` for RGS/RSEGS on `C`); `r` the carried residual (empty when
/// unused); `pair` holds `(x, z)` with `x = ∇f*(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub y: Vec<f64>,
    pub r: Vec<f64>,
    pub pair: BregmanPair,
    pub k: usize,
}

impl SolverState {
    pub fn with_parts(y: Vec<f64>, r: Vec<f64>, pair: BregmanPair) -> Self {
        Self { y, r, pair, k: 0 }
    }

    /// Standard starting point: `y⁽⁰⁾ = 0` (`b` for GERK), `r⁽⁰⁾ = b`,
    /// `x⁽⁰⁾ = ∇f*(z⁽⁰⁾)`.
    pub fn initial(
        problem: &FactorizedProblem,
        method: &Method,
        z0: Option<&[f64]>,
    ) -> Result<Self> {
        let (m, l, n) = problem.dims();
        let f = &method.regularizer;
        let pair = match z0 {
            Some(z) if z.len() != n => {
                return Err(Error::DimensionMismatch {
                    op: "initial dual iterate",
                    expected: n,
                    got: z.len(),
                })
            }
            Some(z) => BregmanPair::from_dual(f, z.to_vec()),
            None => BregmanPair::zeros(f, n),
        };
        let rhs = problem.rhs().to_vec();
        let (y, r) = match method.algorithm {
            Algorithm::Rk | Algorithm::Rrk => (Vec::new(), Vec::new()),
            Algorithm::Rgs | Algorithm::Rsegs => (vec![0.0; n], rhs),
            Algorithm::RkRrk => (vec![0.0; l], Vec::new()),
            Algorithm::RgsRrk => (vec![0.0; l], rhs),
            Algorithm::Gerk => {
                debug_assert_eq!(rhs.len(), m);
                (rhs, Vec::new())
            }
        };
        Ok(Self::with_parts(y, r, pair))
    }

    pub fn x(&self) -> &[f64] {
        self.pair.x()
    }

    pub fn z(&self) -> &[f64] {
        self.pair.z()
    }
}

/// `‖z − P·z‖`, with `P` the orthogonal projector onto the range of the
/// factored matrix (pass the QR of `Bᵀ` for `ran(Bᵀ)`).
pub fn range_defect(qr: &HouseholderQr, z: &[f64]) -> f64 {
    norm(&sub(z, &qr.project_range(z)))
}
