//! Discrete Hardy-type constants near a singular point.
//!
//! Best constants are smallest generalized eigenvalues of the P1 stiffness
//! against lumped weighted masses. Shifts and coercivity pairs are found by
//! bisection on the inertia of an `LDL^T` factorization, and inequalities are
//! audited on seeded Gaussian nodal fields.

pub mod appendix;
pub mod constant;
pub mod inequality;
pub mod shift;

pub use appendix::{appendix_phi_check, sample_point, PhiCheckOptions, PhiReport, PhiSample};
pub use constant::{best_hardy_constant, hardy_study, HardyCase, HardyEstimate, HardyLevel, HardyReport, LevelSpec, LogMeshFit, Placement};
pub use inequality::{check_inequality, gaussian_field, Comparison, Forms, Inequality, InequalityContext, InequalityReport};
pub use shift::{bisect_min, estimate_c0_gamma, is_positive_definite, sweep_c2_c3, Bisection, CoercivitySweep, ShiftEstimate, SweepRow};

use geometry::GeometryError;
use linalg::LinalgError;
use pde::PdeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HardyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("eigen residual {residual:e} exceeds {tol:e}")]
    Residual { residual: f64, tol: f64 },
    #[error("shift predicate fails at the cap C = {c_max} (gamma = {gamma})")]
    CapExceeded { c_max: f64, gamma: f64 },
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
