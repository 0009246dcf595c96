//! Single-step updates. Every algorithm comes in two forms: `*_update` takes
//! explicit 0-based indices (used for coupled-sampler comparisons) and
//! `*_step` draws them from the stream and returns what it drew.
//!
//! Composite steps consume the stream in a fixed order: the `A`-side index
//! (row for RK, column for RGS) first, then the row of `B`.

use super::SolverState;
use crate::dense::{dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::regularizer::{BregmanPair, Regularizer};
use crate::sampling::RngStream;

fn check_len(op: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { op, expected, got })
    }
}

// ---------------------------------------------------------------------------
// kernels (no bounds or shape checks)

#[inline]
pub(crate) fn rk_kernel(a: &DenseMatrix, rhs: &[f64], y: &mut [f64], j: usize) {
    let res = a.row_dot_unchecked(j, y) - rhs[j];
    a.add_row_scaled(j, -res / a.row_norm_sq(j), y);
}

#[inline]
pub(crate) fn rgs_kernel(a: &DenseMatrix, y: &mut [f64], r: &mut [f64], j: usize) {
    let col = a.col(j);
    let d = dot(col, r) / a.col_norm_sq(j);
    y[j] += d;
    for (ri, ci) in r.iter_mut().zip(col) {
        *ri -= d * ci;
    }
}

#[inline]
pub(crate) fn rrk_kernel(
    b: &DenseMatrix,
    target_i: f64,
    pair: &mut BregmanPair,
    f: &Regularizer,
    i: usize,
) {
    let res = b.row_dot_unchecked(i, pair.x()) - target_i;
    let scale = f.gamma() * res / b.row_norm_sq(i);
    pair.update_dual(f, |z| b.add_row_scaled(i, -scale, z));
}

#[inline]
pub(crate) fn gerk_kernel(
    c: &DenseMatrix,
    rhs: &[f64],
    state: &mut SolverState,
    f: &Regularizer,
    j: usize,
    i: usize,
) {
    let col = c.col(j);
    let t = dot(col, &state.y) / c.col_norm_sq(j);
    for (yi, ci) in state.y.iter_mut().zip(col) {
        *yi -= t * ci;
    }
    let res = c.row_dot_unchecked(i, state.pair.x()) - rhs[i] + state.y[i];
    let scale = res / c.row_norm_sq(i);
    state
        .pair
        .update_dual(f, |z| c.add_row_scaled(i, -scale, z));
}

#[inline]
pub(crate) fn rsegs_kernel(
    c: &DenseMatrix,
    state: &mut SolverState,
    f: &Regularizer,
    j: usize,
    i: usize,
) {
    rgs_kernel(c, &mut state.y, &mut state.r, j);
    let res = c.row_dot_unchecked(i, state.pair.x()) - c.row_dot_unchecked(i, &state.y);
    let scale = res / c.row_norm_sq(i);
    state
        .pair
        .update_dual(f, |z| c.add_row_scaled(i, -scale, z));
}

// ---------------------------------------------------------------------------
// RK

/// Projects `y` onto the hyperplane `{v : A_{j,:}·v = b_j}`.
pub fn rk_update(a: &DenseMatrix, rhs: &[f64], y: &mut [f64], j: usize) -> Result<()> {
    a.check_row(j)?;
    check_len("rk: length of b", a.rows(), rhs.len())?;
    check_len("rk: length of y", a.cols(), y.len())?;
    rk_kernel(a, rhs, y, j);
    Ok(())
}

pub fn rk_step(a: &DenseMatrix, rhs: &[f64], y: &mut [f64], rng: &mut RngStream) -> Result<usize> {
    let j = a.sample_row(rng)?;
    rk_update(a, rhs, y, j)?;
    Ok(j)
}

// ---------------------------------------------------------------------------
// RGS

/// Exact minimization of `‖b − A·y‖²` along coordinate `j`, with the residual
/// `r = b − A·y` carried along.
pub fn rgs_update(a: &DenseMatrix, y: &mut [f64], r: &mut [f64], j: usize) -> Result<()> {
    a.check_col(j)?;
    check_len("rgs: length of y", a.cols(), y.len())?;
    check_len("rgs: length of r", a.rows(), r.len())?;
    rgs_kernel(a, y, r, j);
    Ok(())
}

pub fn rgs_step(
    a: &DenseMatrix,
    y: &mut [f64],
    r: &mut [f64],
    rng: &mut RngStream,
) -> Result<usize> {
    let j = a.sample_col(rng)?;
    rgs_update(a, y, r, j)?;
    Ok(j)
}

// ---------------------------------------------------------------------------
// RRK

/// `z ← z − γ·(B_{i,:}·x − target_i)/‖B_{i,:}‖²·B_{i,:}ᵀ`, then `x = ∇f*(z)`.
pub fn rrk_update(
    b: &DenseMatrix,
    target: &[f64],
    pair: &mut BregmanPair,
    f: &Regularizer,
    i: usize,
) -> Result<()> {
    b.check_row(i)?;
    check_len("rrk: length of target", b.rows(), target.len())?;
    check_len("rrk: length of z", b.cols(), pair.len())?;
    rrk_kernel(b, target[i], pair, f, i);
    Ok(())
}

pub fn rrk_step(
    b: &DenseMatrix,
    target: &[f64],
    pair: &mut BregmanPair,
    f: &Regularizer,
    rng: &mut RngStream,
) -> Result<usize> {
    let i = b.sample_row(rng)?;
    rrk_update(b, target, pair, f, i)?;
    Ok(i)
}

// ---------------------------------------------------------------------------
// RK-RRK and RGS-RRK on the factors

fn check_factored(a: &DenseMatrix, b: &DenseMatrix, state: &SolverState) -> Result<()> {
    check_len("factored step: rows of B", a.cols(), b.rows())?;
    check_len("factored step: length of y", a.cols(), state.y.len())?;
    check_len("factored step: length of z", b.cols(), state.pair.len())
}

/// One RK step on `A·y = b` (row `j`) followed by one RRK step on
/// `B·x = y` (row `i`).
pub fn rk_rrk_update(
    a: &DenseMatrix,
    b: &DenseMatrix,
    rhs: &[f64],
    state: &mut SolverState,
    f: &Regularizer,
    (j, i): (usize, usize),
) -> Result<()> {
    check_factored(a, b, state)?;
    b.check_row(i)?;
    rk_update(a, rhs, &mut state.y, j)?;
    rrk_kernel(b, state.y[i], &mut state.pair, f, i);
    state.k += 1;
    Ok(())
}

pub fn rk_rrk_step(
    a: &DenseMatrix,
    b: &DenseMatrix,
    rhs: &[f64],
    state: &mut SolverState,
    f: &Regularizer,
    rng: &mut RngStream,
) -> Result<(usize, usize)> {
    let j = a.sample_row(rng)?;
    let i = b.sample_row(rng)?;
    rk_rrk_update(a, b, rhs, state, f, (j, i))?;
    Ok((j, i))
}

/// One RGS step on `min ‖b − A·y‖` (column `j`, residual recursion) followed
/// by one RRK step on `B·x = y` (row `i`).
pub fn rgs_rrk_update(
    a: &DenseMatrix,
    b: &DenseMatrix,
    state: &mut SolverState,
    f: &Regularizer,
    (j, i): (usize, usize),
) -> Result<()> {
    check_factored(a, b, state)?;
    b.check_row(i)?;
    rgs_update(a, &mut state.y, &mut state.r, j)?;
    rrk_kernel(b, state.y[i], &mut state.pair, f, i);
    state.k += 1;
    Ok(())
}

pub fn rgs_rrk_step(
    a: &DenseMatrix,
    b: &DenseMatrix,
    state: &mut SolverState,
    f: &Regularizer,
    rng: &mut RngStream,
) -> Result<(usize, usize)> {
    let j = a.sample_col(rng)?;
    let i = b.sample_row(rng)?;
    rgs_rrk_update(a, b, state, f, (j, i))?;
    Ok((j, i))
}

// ---------------------------------------------------------------------------
// full-system extended methods on C

fn check_full(c: &DenseMatrix, state: &SolverState, y_len: usize) -> Result<()> {
    check_len("full-system step: length of y", y_len, state.y.len())?;
    check_len("full-system step: length of z", c.cols(), state.pair.len())
}

/// GERK-(a,d): `y` runs RK on `Cᵀ·y = 0` from `y⁽⁰⁾ = b` (column `j`), then
/// one sparse Kaczmarz step on `C·x = b − y` (row `i`).
pub fn gerk_update(
    c: &DenseMatrix,
    rhs: &[f64],
    state: &mut SolverState,
    lambda: f64,
    (j, i): (usize, usize),
) -> Result<()> {
    let f = Regularizer::elastic_net(lambda)?;
    c.check_col(j)?;
    c.check_row(i)?;
    check_len("gerk: length of b", c.rows(), rhs.len())?;
    check_full(c, state, c.rows())?;
    gerk_kernel(c, rhs, state, &f, j, i);
    state.k += 1;
    Ok(())
}

pub fn gerk_step(
    c: &DenseMatrix,
    rhs: &[f64],
    state: &mut SolverState,
    lambda: f64,
    rng: &mut RngStream,
) -> Result<(usize, usize)> {
    let j = c.sample_col(rng)?;
    let i = c.sample_row(rng)?;
    gerk_update(c, rhs, state, lambda, (j, i))?;
    Ok((j, i))
}

/// RSEGS: `y ∈ ℝⁿ` runs RGS on `min ‖b − C·y‖` (column `j`), then one sparse
/// Kaczmarz step on `C·x = C·y` (row `i`).
pub fn rsegs_update(
    c: &DenseMatrix,
    state: &mut SolverState,
    lambda: f64,
    (j, i): (usize, usize),
) -> Result<()> {
    let f = Regularizer::elastic_net(lambda)?;
    c.check_col(j)?;
    c.check_row(i)?;
    check_full(c, state, c.cols())?;
    check_len("rsegs: length of r", c.rows(), state.r.len())?;
    rsegs_kernel(c, state, &f, j, i);
    state.k += 1;
    Ok(())
}

pub fn rsegs_step(
    c: &DenseMatrix,
    state: &mut SolverState,
    lambda: f64,
    rng: &mut RngStream,
) -> Result<(usize, usize)> {
    let j = c.sample_col(rng)?;
    let i = c.sample_row(rng)?;
    rsegs_update(c, state, lambda, (j, i))?;
    Ok((j, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{max_abs_diff, norm, sub};

    #[test]
    fn rk_examples() {
        let a = DenseMatrix::from_rows(&[vec![2.0]]).unwrap();
        let mut y = vec![0.0];
        rk_update(&a, &[6.0], &mut y, 0).unwrap();
        assert_eq!(y, vec![3.0]);

        let i2 = DenseMatrix::identity(2).unwrap();
        let mut y = vec![0.0, 0.0];
        rk_update(&i2, &[1.0, 2.0], &mut y, 0).unwrap();
        assert_eq!(y, vec![1.0, 0.0]);
        // fixed point
        rk_update(&i2, &[1.0, 2.0], &mut y, 0).unwrap();
        assert_eq!(y, vec![1.0, 0.0]);

        assert!(rk_update(&i2, &[1.0, 2.0], &mut y, 2).is_err());
        assert!(rk_update(&i2, &[1.0], &mut y, 0).is_err());
    }

    #[test]
    fn rgs_examples() {
        let a = DenseMatrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let mut y = vec![0.0];
        let mut r = vec![5.0, 7.0];
        rgs_update(&a, &mut y, &mut r, 0).unwrap();
        assert_eq!(y, vec![5.0]);
        assert_eq!(r, vec![0.0, 7.0]);
        // stationary point
        rgs_update(&a, &mut y, &mut r, 0).unwrap();
        assert_eq!(y, vec![5.0]);
    }

    #[test]
    fn rgs_recursion_matches_direct_residual() {
        let mut rng = RngStream::new(70);
        let a = DenseMatrix::gaussian(10, 3, &mut rng).unwrap();
        let rhs = rng.normal_vec(10);
        let mut y = vec![0.0; 3];
        let mut r = rhs.clone();
        for _ in 0..50 {
            rgs_step(&a, &mut y, &mut r, &mut rng).unwrap();
        }
        let direct = sub(&rhs, &a.matvec(&y).unwrap());
        assert!(max_abs_diff(&r, &direct) < 1e-12);
    }

    #[test]
    fn rrk_examples() {
        let l1 = Regularizer::elastic_net(1.0).unwrap();
        let b = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let mut p = BregmanPair::zeros(&l1, 1);
        rrk_update(&b, &[5.0], &mut p, &l1, 0).unwrap();
        assert_eq!(p.z(), &[5.0]);
        assert_eq!(p.x(), &[4.0]);
        // satisfied row leaves the pair unchanged
        let before = p.clone();
        rrk_update(&b, &[4.0], &mut p, &l1, 0).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn gerk_y_substep_on_orthogonal_columns() {
        let c = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let rhs = vec![3.0, 4.0, 5.0];
        let f = Regularizer::elastic_net(0.5).unwrap();
        let mut st = SolverState::with_parts(rhs.clone(), Vec::new(), BregmanPair::zeros(&f, 2));
        gerk_update(&c, &rhs, &mut st, 0.5, (1, 0)).unwrap();
        let cty = c.matvec_t(&st.y).unwrap();
        assert_eq!(cty[1], 0.0);
        assert_eq!(cty[0], 3.0);
        assert_eq!(st.y, vec![3.0, 0.0, 5.0]);
        assert_eq!(st.k, 1);
    }

    #[test]
    fn rsegs_matched_iterates_leave_z() {
        let mut rng = RngStream::new(71);
        let c = DenseMatrix::gaussian(6, 4, &mut rng).unwrap();
        let f = Regularizer::Quadratic;
        // r = 0 keeps y' = 0 = x
        let mut st = SolverState::with_parts(vec![0.0; 4], vec![0.0; 6], BregmanPair::zeros(&f, 4));
        rsegs_update(&c, &mut st, 0.0, (2, 3)).unwrap();
        assert_eq!(st.pair.z(), &[0.0; 4]);
        assert_eq!(norm(&st.y), 0.0);
    }
}
