//! Randomized Kaczmarz and Gauss–Seidel solvers for factorized linear
//! systems `A·B·x = b`, including regularized variants that recover sparse
//! (least-squares) solutions without forming `C = A·B`.
//!
//! - [`dense`]: column-major matrices, weighted sampling, QR and Jacobi
//!   eigenvalue oracles, CSV I/O.
//! - [`regularizer`]: strongly convex objectives, conjugates and Bregman
//!   distances.
//! - [`solvers`]: step functions and the iteration driver.
//! - [`theory`]: rate constants and expectation bounds.
//! - [`problems`]: Gaussian and dataset-backed test problems.
//! - [`experiments`]: metrics, trial averaging and the example reruns.

pub mod dense;
pub mod error;
pub mod experiments;
pub mod problems;
pub mod regularizer;
pub mod sampling;
pub mod solvers;
pub mod theory;

pub use crate::dense::DenseMatrix;
pub use crate::error::{Error, Result};
pub use crate::problems::FactorizedProblem;
pub use crate::regularizer::{BregmanPair, Regularizer};
pub use crate::sampling::{RngStream, WeightedSampler};
pub use crate::solvers::{Algorithm, Method, SolverConfig, SolverState};
