//! Carleman weights for heat operators with an inverse-square potential
//! singular at a boundary point.
//!
//! The weight is `sigma(t, x) = theta(t) (C_lambda - tau(x))` with
//! `tau = |x|^2 psi + (|x|/r_0)^lambda e^{lambda psi}` and `psi = delta (psi_1 + 1)`,
//! where `psi_1` is a smoothed distance to the boundary. Evaluation of `tau`
//! is available in a scaled form so that large `lambda` never overflows.

mod poly;
mod psi;
mod recipe;
mod weight;

pub use poly::EvenPoly;
pub use psi::{build_psi, build_psi_seeded, ConstantPsi, Psi1, PsiField, PsiKit, ScalarJet, DEFAULT_PSI_SEED};
pub use recipe::{choose_delta, choose_r0, delta_clauses, r0_clauses, Clause, DeltaInputs, R0Inputs, RecipeChoice};
pub use weight::{
    c_lambda_samples, choose_c_lambda, choose_c_lambda_on, ln_tau, CLambda, SigmaEval, TauEval, TauJet, TauPart, WeightConfig, WeightParams,
};

use geometry::GeometryError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightsError {
    #[error("psi_1 has a critical point at {point:?} outside closure(omega_0)")]
    ConstructionFailure { point: Vec<f64> },
    #[error("unsupported geometry: {0}")]
    Unsupported(String),
    #[error("kit invariant `{check}` fails at {point:?}")]
    InvariantViolation { check: String, point: Vec<f64> },
    #[error("invalid kit: {0}")]
    InvalidKit(String),
    #[error("gamma = {0} is outside (1, 2)")]
    InvalidGamma(f64),
    #[error("invalid constant: {0}")]
    InvalidConstant(String),
    #[error("t = {t} is outside the window (0, {horizon})")]
    OutOfWindow { t: f64, horizon: f64 },
    #[error("overflow: {0}")]
    Overflow(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
