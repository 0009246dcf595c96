//! Rate constants and expectation bounds for RK-RRK / RGS-RRK.
//!
//! With `α = 1 − σ_min(A)²/‖A‖_F²`, `β = 1 − γν/(2‖B‖_F²)` and any `δ > 0`,
//! the expected Bregman distance after `k` steps is at most
//!
//! ```text
//! (1+δ/γ)ᵏ βᵏ D₀ + (δ+γ)γ/(2δ‖B‖_F²) · L · Σ_{i<k} α^{k−i} (1+δ/γ)ⁱ βⁱ
//! ```
//!
//! where `L = ‖A†b‖²` for consistent systems and `‖A†‖²‖AA†b‖²` otherwise.

use std::fmt::Write as _;

use crate::dense::{
    householder_qr, least_squares_solve, min_norm_solve, norm_sq, sigma_min, DenseMatrix,
};
use crate::error::{Error, Result};
use crate::regularizer::Regularizer;

/// `1 − σ_min(A)²/‖A‖_F²`.
pub fn alpha_of(a: &DenseMatrix) -> Result<f64> {
    householder_qr(a)?;
    let s = sigma_min(a)?;
    Ok(1.0 - s * s / a.frob_sq())
}

/// `ν = 2σ_min(Bᵀ)²`, the admissibility constant of `½‖x‖²`.
pub fn nu_quadratic(b: &DenseMatrix) -> Result<f64> {
    let bt = b.transpose();
    householder_qr(&bt)?;
    let s = sigma_min(&bt)?;
    Ok(2.0 * s * s)
}

/// `1 − γν/(2‖B‖_F²)`.
pub fn beta_of(b_frob_sq: f64, gamma: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::invalid(format!("ν must be positive, got {nu}")));
    }
    if !(gamma > 0.0) || !(b_frob_sq > 0.0) {
        return Err(Error::invalid("γ and ‖B‖_F² must be positive"));
    }
    let beta = 1.0 - gamma * nu / (2.0 * b_frob_sq);
    if beta < 0.0 {
        log::warn!("β = {beta} < 0: γν exceeds 2‖B‖_F², ν is likely overstated");
    }
    Ok(beta)
}

/// Midpoint `γ(1/ρ − 1)/2` of the admissible interval `(0, γ(1/ρ − 1))`.
pub fn default_delta(rho: f64, gamma: f64) -> Result<f64> {
    if !(rho < 1.0) {
        return Err(Error::invalid(format!(
            "ρ = {rho} >= 1: no δ gives a contracting rate"
        )));
    }
    if rho <= 0.0 {
        return Ok(gamma);
    }
    Ok(gamma * (1.0 / rho - 1.0) / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateConstants {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub rho: f64,
    pub delta: f64,
}

impl RateConstants {
    /// `δ` defaults to [`default_delta`].
    pub fn new(alpha: f64, beta: f64, nu: f64, gamma: f64, delta: Option<f64>) -> Result<Self> {
        let rho = alpha.max(beta);
        let delta = match delta {
            Some(d) => d,
            None => default_delta(rho, gamma)?,
        };
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("δ must be positive, got {delta}")));
        }
        Ok(Self {
            alpha,
            beta,
            nu,
            rho,
            delta,
        })
    }

    /// Constants for the factors under objective `f`. `ν` is derived for the
    /// quadratic objective and must be supplied otherwise.
    pub fn from_factors(
        a: &DenseMatrix,
        b: &DenseMatrix,
        f: &Regularizer,
        nu: Option<f64>,
        delta: Option<f64>,
    ) -> Result<Self> {
        let nu = match (nu, f) {
            (Some(nu), _) => nu,
            (None, Regularizer::Quadratic) => nu_quadratic(b)?,
            (None, _) => {
                return Err(Error::invalid(format!(
                    "ν is not derivable for {f}; supply it explicitly"
                )))
            }
        };
        let alpha = alpha_of(a)?;
        let beta = beta_of(b.frob_sq(), f.gamma(), nu)?;
        Self::new(alpha, beta, nu, f.gamma(), delta)
    }

    /// `(1+δ/γ)`.
    fn growth(&self, gamma: f64) -> f64 {
        1.0 + self.delta / gamma
    }
}

fn check_bound_args(consts: &RateConstants, b_frob_sq: f64, gamma: f64) -> Result<()> {
    if !(consts.delta > 0.0) {
        return Err(Error::invalid(format!(
            "δ must be positive, got {}",
            consts.delta
        )));
    }
    if !(gamma > 0.0) || !(b_frob_sq > 0.0) {
        return Err(Error::invalid("γ and ‖B‖_F² must be positive"));
    }
    Ok(())
}

fn coupling(consts: &RateConstants, b_frob_sq: f64, gamma: f64) -> f64 {
    (consts.delta + gamma) * gamma / (2.0 * consts.delta * b_frob_sq)
}

/// The finite-sum bound at step `k`, evaluated term by term.
pub fn theorem_bound(
    consts: &RateConstants,
    d0: f64,
    lhs_norm_sq: f64,
    b_frob_sq: f64,
    gamma: f64,
    k: usize,
) -> Result<f64> {
    check_bound_args(consts, b_frob_sq, gamma)?;
    let q = consts.growth(gamma) * consts.beta;
    let sum: f64 = (0..k)
        .map(|i| consts.alpha.powi((k - i) as i32) * q.powi(i as i32))
        .sum();
    Ok(q.powi(k as i32) * d0 + coupling(consts, b_frob_sq, gamma) * lhs_norm_sq * sum)
}

/// The geometric envelope `((1+δ/γ)ρ)ᵏ (D₀ + (δ+γ)γ²/(2δ²‖B‖_F²)·L)`,
/// defined only when `(1+δ/γ)ρ < 1`.
pub fn simplified_bound(
    consts: &RateConstants,
    d0: f64,
    lhs_norm_sq: f64,
    b_frob_sq: f64,
    gamma: f64,
    k: usize,
) -> Result<f64> {
    check_bound_args(consts, b_frob_sq, gamma)?;
    let rate = consts.growth(gamma) * consts.rho;
    if !(rate < 1.0) {
        return Err(Error::invalid(format!(
            "(1+δ/γ)ρ = {rate} >= 1; δ must lie in (0, {:e})",
            gamma * (1.0 / consts.rho - 1.0)
        )));
    }
    let c =
        (consts.delta + gamma) * gamma * gamma / (2.0 * consts.delta * consts.delta * b_frob_sq);
    Ok(rate.powi(k as i32) * (d0 + c * lhs_norm_sq))
}

/// `‖A†b‖²`.
pub fn lhs_consistent(a: &DenseMatrix, rhs: &[f64]) -> Result<f64> {
    Ok(norm_sq(&least_squares_solve(a, rhs)?))
}

/// `‖A†‖²·‖AA†b‖² = ‖AA†b‖²/σ_min(A)²`.
pub fn lhs_inconsistent(a: &DenseMatrix, rhs: &[f64]) -> Result<f64> {
    let proj = householder_qr(a)?.project_range(rhs);
    let s = sigma_min(a)?;
    Ok(norm_sq(&proj) / (s * s))
}

/// The quadratic-objective solution: the minimum-norm `x` with
/// `B·x = A†b`.
pub fn min_norm_reference(a: &DenseMatrix, b: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    min_norm_solve(b, &least_squares_solve(a, rhs)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRow {
    pub k: usize,
    pub theorem: f64,
    /// Absent when `δ` is outside the envelope's domain.
    pub simplified: Option<f64>,
}

pub fn bound_table(
    consts: &RateConstants,
    d0: f64,
    lhs_norm_sq: f64,
    b_frob_sq: f64,
    gamma: f64,
    ks: &[usize],
) -> Result<Vec<BoundRow>> {
    ks.iter()
        .map(|&k| {
            Ok(BoundRow {
                k,
                theorem: theorem_bound(consts, d0, lhs_norm_sq, b_frob_sq, gamma, k)?,
                simplified: simplified_bound(consts, d0, lhs_norm_sq, b_frob_sq, gamma, k).ok(),
            })
        })
        .collect()
}

pub fn bound_table_csv(rows: &[BoundRow]) -> String {
    let mut s = String::from("k,theorem_bound,simplified_bound\n");
    for r in rows {
        let simp = r.simplified.map(|v| format!("{v:e}")).unwrap_or_default();
        let _ = writeln!(s, "{},{:e},{simp}", r.k, r.theorem);
    }
    s
}
