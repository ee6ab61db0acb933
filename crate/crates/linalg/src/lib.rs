//! Small sparse linear-algebra toolkit used by the PDE, Hardy and control crates.
//!
//! Matrices are stored in compressed sparse row form. Symmetric systems are
//! factored with an envelope (skyline) `LDL^T` decomposition, which is cheap
//! for the banded orderings produced by the mesh generators.

pub mod cg;
pub mod csr;
pub mod envelope;
pub mod generalized;
pub mod lanczos;

pub use cg::{conjugate_gradient, CgOptions, CgOutcome};
pub use csr::CsrMatrix;
pub use envelope::{EnvelopeLdl, Inertia};
pub use generalized::{definite_shift, smallest_generalized_eigen, GeneralizedEigen, GeneralizedOptions};
pub use lanczos::{lanczos_largest, LanczosOptions, LanczosOutcome};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("zero pivot at row {row} during LDL^T factorization")]
    ZeroPivot { row: usize },
    #[error("matrix is not symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },
    #[error("iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("breakdown: {0}")]
    Breakdown(String),
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inner product weighted by a positive diagonal.
pub fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
