//! P1 discretization of `-Delta - mu / |x|^2` with homogeneous Dirichlet data, θ-scheme
//! marches of the forward heat equation and its backward adjoint, and the
//! refinement experiment separating well-posed from blow-up regimes.
//!
//! Unknowns live at the free nodes of a [`Mesh`]. The singular point `x = 0` is
//! always a Dirichlet node, so the potential is evaluated pointwise at nodes with
//! `|x| > 0`. Inner products use the lumped mass matrix.

pub mod assembly;
pub mod blowup;
pub mod energy;
pub mod mesh;
pub mod stepping;

pub use assembly::{assemble, critical_mu, Discretization};
pub use blowup::{blowup_experiment, classify, BlowupConfig, BlowupLevel, BlowupReport, Dichotomy, LevelMethod};
pub use energy::{effective_rate, energy_monotonicity_check, rate_from_spectrum, trapezoid_window, EnergyReport, RateEstimate};
pub use mesh::{Mesh, MeshKind, PolarSpec};
pub use stepping::{solve_adjoint, solve_forward, Propagator, Record, Scheme, Snapshot, TimeGrid, Trajectory};

use linalg::LinalgError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("unknown at node {node} sits on the singular point")]
    SingularNode { node: usize },
    #[error("invalid time step: {0}")]
    InvalidTimeStep(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("M + theta dt A is not positive definite (first nonpositive pivot at row {row}, dt = {dt:e})")]
    NotDefinite { row: usize, dt: f64 },
    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: LinalgError,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value at unknown {index}")]
    NonFinite { index: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
}
