//! Subspace segmentation with the trace Lasso.
//!
//! Each data point is represented as a combination of the remaining points
//! under a trace Lasso penalty `‖X·Diag(w)‖_*`, which behaves like the ℓ1 norm
//! on uncorrelated dictionaries and like the ℓ2 norm on highly correlated
//! ones. The coefficients are symmetrized into an affinity graph and split
//! into groups by normalized spectral clustering.
//!
//! Matrices are `nalgebra::DMatrix<f64>` (column-major); data matrices hold
//! one sample per column, so `X` is `d × n`.
//!
//! Modules:
//! - [`numerics`]: SVD, nuclear norm, proximal operators, PCA.
//! - [`trace_lasso`]: the norm itself and the ADM solver.
//! - [`baselines`]: LSR, SSC (Lasso) and LRR reference solvers.
//! - [`segmentation`]: coefficient matrix, affinity and spectral clustering.
//! - [`evaluation`]: matching accuracy, error statistics, benchmark reports.
//! - [`data`]: synthetic subspaces, IDX/CSV loaders, protocol preprocessing.
//! - [`config`]: flat `key = value` configuration files.

pub mod baselines;
pub mod config;
pub mod data;
mod error;
pub mod evaluation;
pub mod numerics;
pub mod segmentation;
pub mod trace_lasso;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};

#[cfg(test)]
#[path = "../tests/oracles/mod.rs"]
mod oracles;
