//! Penalized HUM null controls and discrete observability constants for the
//! heat equation with an inverse-square potential.
//!
//! The control-to-state map, its adjoint and the Gramian are built from the
//! same θ-scheme propagator, so the Gramian is symmetric in the lumped mass
//! inner product up to rounding.

pub mod hum;
pub mod observability;
pub mod problem;
pub mod scan;

pub use hum::{hum_control, ControlResult, HumOptions, AUDIT_SLACK};
pub use observability::{observability_constant, ObservabilityEstimate, MAX_DENSE_UNKNOWNS};
pub use problem::{ControlProblem, Observation};
pub use scan::{cost_scan, ScanConfig, ScanParameter, ScanRow, ScanValues};

use linalg::LinalgError;
use pde::PdeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("mu = {mu} exceeds the critical constant {critical}")]
    Supercritical { mu: f64, critical: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("conjugate gradient stopped after {iterations} iterations with residual {residual:e}")]
    CgStagnation { iterations: usize, residual: f64 },
    #[error("observation energy {denominator:e} is numerically zero; check the control set")]
    DegenerateObservation { denominator: f64 },
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
