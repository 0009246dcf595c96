//! Strongly convex objectives `f`, their conjugates `f*`, the gradient map
//! `∇f*`, and Bregman distances.
//!
//! Two objectives are provided, both 1-strongly convex:
//!
//! | kind            | `f(x)`              | `∇f*(z)`    | `f*(z)`          |
//! |-----------------|---------------------|-------------|------------------|
//! | `Quadratic`     | `½‖x‖²`             | `z`         | `½‖z‖²`          |
//! | `ElasticNetL1`  | `½‖x‖² + λ‖x‖₁`     | `S_λ(z)`    | `½‖S_λ(z)‖²`     |
//!
//! A primal iterate is only ever produced as `x = ∇f*(z)`, which makes `z` a
//! subgradient of `f` at `x` by construction (see [`BregmanPair`]).

use std::fmt;

use crate::dense::{dot, norm_sq};
use crate::error::{Error, Result};

/// Componentwise soft shrinkage `S_λ(t) = max(|t| − λ, 0)·sgn(t)`.
pub fn soft_shrinkage(x: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    Ok(x.iter().map(|&t| shrink(t, lambda)).collect())
}

#[inline]
pub(crate) fn shrink(t: f64, lambda: f64) -> f64 {
    if t > lambda {
        t - lambda
    } else if t < -lambda {
        t + lambda
    } else {
        0.0
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "shrinkage parameter must be finite and non-negative, got {lambda}"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularizer {
    Quadratic,
    ElasticNetL1 { lambda: f64 },
}

impl Regularizer {
    pub fn elastic_net(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Regularizer::ElasticNetL1 { lambda })
    }

    /// Strong-convexity modulus; also the RRK step multiplier.
    pub fn gamma(&self) -> f64 {
        1.0
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            Regularizer::Quadratic => 0.0,
            Regularizer::ElasticNetL1 { lambda } => lambda,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let q = 0.5 * norm_sq(x);
        match *self {
            Regularizer::Quadratic => q,
            Regularizer::ElasticNetL1 { lambda } => {
                q + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
            }
        }
    }

    pub fn conjugate(&self, z: &[f64]) -> f64 {
        match *self {
            Regularizer::Quadratic => 0.5 * norm_sq(z),
            Regularizer::ElasticNetL1 { lambda } => {
                0.5 * z.iter().map(|&t| shrink(t, lambda).powi(2)).sum::<f64>()
            }
        }
    }

    pub fn grad_conjugate(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        self.grad_conjugate_into(z, &mut out);
        out
    }

    pub fn grad_conjugate_into(&self, z: &[f64], out: &mut [f64]) {
        match *self {
            Regularizer::Quadratic => out.copy_from_slice(z),
            Regularizer::ElasticNetL1 { lambda } => {
                for (o, &t) in out.iter_mut().zip(z) {
                    *o = shrink(t, lambda);
                }
            }
        }
    }

    /// `D_{f,z}(∇f*(z), target) = f(target) + f*(z) − ⟨z, target⟩`.
    pub fn bregman_distance(&self, z: &[f64], target: &[f64]) -> f64 {
        // clamp tiny negative round-off; the exact value is non-negative
        (self.value(target) + self.conjugate(z) - dot(z, target)).max(0.0)
    }
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regularizer::Quadratic => write!(f, "quadratic"),
            Regularizer::ElasticNetL1 { lambda } => write!(f, "l1(lambda={lambda})"),
        }
    }
}

/// A primal/dual pair with `x = ∇f*(z)`, so that `z ∈ ∂f(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BregmanPair {
    x: Vec<f64>,
    z: Vec<f64>,
}

impl BregmanPair {
    pub fn from_dual(f: &Regularizer, z: Vec<f64>) -> Self {
        let x = f.grad_conjugate(&z);
        Self { x, z }
    }

    pub fn zeros(f: &Regularizer, n: usize) -> Self {
        Self::from_dual(f, vec![0.0; n])
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Mutates the dual iterate and re-derives the primal one.
    pub fn update_dual(&mut self, f: &Regularizer, update: impl FnOnce(&mut [f64])) {
        update(&mut self.z);
        f.grad_conjugate_into(&self.z, &mut self.x);
    }

    /// `D_{f,z}(x, target)`.
    pub fn bregman_to(&self, f: &Regularizer, target: &[f64]) -> f64 {
        f.bregman_distance(&self.z, target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{norm, sub};
    use crate::sampling::RngStream;
    use proptest::prelude::*;

    #[test]
    fn shrinkage_examples() {
        assert_eq!(
            soft_shrinkage(&[2.0, -0.5, 0.0], 1.0).unwrap(),
            vec![1.0, 0.0, 0.0]
        );
        assert_eq!(
            soft_shrinkage(&[2.0, -1.0, 0.5], 1.5).unwrap(),
            vec![0.5, 0.0, 0.0]
        );
        let x = [3.25, -1e-300, 0.0, -7.5];
        assert_eq!(soft_shrinkage(&x, 0.0).unwrap(), x.to_vec());
        assert!(soft_shrinkage(&x, -0.1).is_err());
        assert!(Regularizer::elastic_net(-1.0).is_err());
        assert!(Regularizer::elastic_net(f64::NAN).is_err());
    }

    #[test]
    fn grad_conjugate_examples() {
        let l1 = Regularizer::elastic_net(1.0).unwrap();
        assert_eq!(
            Regularizer::Quadratic.grad_conjugate(&[3.0, -1.0]),
            vec![3.0, -1.0]
        );
        assert_eq!(l1.grad_conjugate(&[3.0, -0.2]), vec![2.0, 0.0]);
        assert_eq!(l1.grad_conjugate(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(Regularizer::Quadratic.grad_conjugate(&[0.0]), vec![0.0]);
    }

    #[test]
    fn quadratic_bregman_is_half_squared_distance() {
        let x = [1.0, -2.0, 0.5];
        let xs = [0.0, 1.0, 1.0];
        let d = Regularizer::Quadratic.bregman_distance(&x, &xs);
        let expect = 0.5 * norm(&sub(&x, &xs)).powi(2);
        assert!((d - expect).abs() < 1e-14);
    }

    #[test]
    fn bregman_to_self_is_zero() {
        let l1 = Regularizer::elastic_net(0.7).unwrap();
        let z = [2.0, -0.3, 1.1, -4.0];
        let x = l1.grad_conjugate(&z);
        assert!(l1.bregman_distance(&z, &x).abs() < 1e-14);
    }

    /// `f*(z) = sup_y ⟨z,y⟩ − f(y)` by grid search over `[−5, 5]`.
    fn conjugate_by_grid(f: &Regularizer, z: f64) -> f64 {
        let steps = 100_000;
        (0..=steps)
            .map(|k| -5.0 + 10.0 * k as f64 / steps as f64)
            .map(|y| z * y - f.value(&[y]))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn elastic_net_conjugate_matches_grid() {
        let l1 = Regularizer::elastic_net(1.0).unwrap();
        let grid = conjugate_by_grid(&l1, 2.0);
        assert!((grid - 0.5).abs() < 1e-7, "{grid}");
        assert_eq!(l1.conjugate(&[2.0]), 0.5);
        // D_{f,z}(∇f*(z), 0) = f(0) + f*(z) − 0
        assert_eq!(l1.bregman_distance(&[2.0], &[0.0]), 0.5);
        for &z in &[-3.3, -0.4, 0.0, 1.2, 4.1] {
            assert!((conjugate_by_grid(&l1, z) - l1.conjugate(&[z])).abs() < 1e-7);
        }
    }

    #[test]
    fn pair_tracks_dual() {
        let l1 = Regularizer::elastic_net(1.0).unwrap();
        let mut p = BregmanPair::zeros(&l1, 2);
        p.update_dual(&l1, |z| {
            z[0] = 5.0;
            z[1] = -0.5;
        });
        assert_eq!(p.x(), &[4.0, 0.0]);
        assert_eq!(p.z(), &[5.0, -0.5]);
    }

    fn regs() -> impl Strategy<Value = Regularizer> {
        prop_oneof![
            Just(Regularizer::Quadratic),
            (0.0f64..3.0).prop_map(|l| Regularizer::ElasticNetL1 { lambda: l }),
        ]
    }

    proptest! {
        #[test]
        fn fenchel_equality(f in regs(), z in prop::collection::vec(-10.0f64..10.0, 1..12)) {
            let x = f.grad_conjugate(&z);
            let lhs = f.value(&x) + f.conjugate(&z);
            prop_assert!((lhs - dot(&z, &x)).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }

        #[test]
        fn shrinkage_properties(
            a in prop::collection::vec(-10.0f64..10.0, 8),
            b in prop::collection::vec(-10.0f64..10.0, 8),
            lambda in 0.0f64..4.0,
        ) {
            let sa = soft_shrinkage(&a, lambda).unwrap();
            let sb = soft_shrinkage(&b, lambda).unwrap();
            prop_assert!(norm(&sub(&sa, &sb)) <= norm(&sub(&a, &b)));
            let neg: Vec<f64> = a.iter().map(|v| -v).collect();
            let sneg = soft_shrinkage(&neg, lambda).unwrap();
            for (p, q) in sa.iter().zip(&sneg) {
                prop_assert_eq!(*p, -*q);
            }
            for (s, x) in sa.iter().zip(&a) {
                prop_assert!(s.abs() <= (x.abs() - lambda).max(0.0));
            }
        }
    }

    #[test]
    fn bregman_lower_bound_and_descent() {
        let mut rng = RngStream::new(50);
        for f in [
            Regularizer::Quadratic,
            Regularizer::elastic_net(1.0).unwrap(),
        ] {
            for _ in 0..2000 {
                let z: Vec<f64> = rng.normal_vec(6).iter().map(|v| 3.0 * v).collect();
                let w: Vec<f64> = rng.normal_vec(6).iter().map(|v| 3.0 * v).collect();
                let t = rng.normal_vec(6);
                let x = f.grad_conjugate(&z);
                let d = f.bregman_distance(&z, &t);
                let lower = 0.5 * f.gamma() * norm(&sub(&x, &t)).powi(2);
                assert!(d >= lower - 1e-10 * (1.0 + d));
                let rhs = f.conjugate(&z)
                    + dot(&x, &sub(&w, &z))
                    + norm(&sub(&w, &z)).powi(2) / (2.0 * f.gamma());
                assert!(f.conjugate(&w) <= rhs + 1e-10 * (1.0 + rhs.abs()));
            }
        }
    }
}
