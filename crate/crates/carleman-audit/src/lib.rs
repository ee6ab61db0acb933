//! Sampled audit of the pointwise inequalities behind a Carleman estimate
//! for heat operators with a boundary inverse-square singularity.
//!
//! For a weight configuration the audit draws stratified points (log-radial
//! layers near the singular point, the bulk, the control core and the
//! boundary) and evaluates every inequality in a canonical `LHS >= RHS`
//! form. Values are handled in log scale, since `e^{lambda psi}` leaves the
//! `f64` range for realistic constants. [`Auditor::find_lambda0`] scans a
//! `lambda` grid for the first value at which every check passes.

mod audit;
mod margin;
mod sampling;
mod terms;

pub use audit::{
    AuditConstants, AuditOptions, AuditReport, Auditor, CheckId, CheckRecord, Lambda0, LambdaTrial, Region, DEFAULT_LAMBDA_GRID,
    PHI_HESSIAN_MIN_LAMBDA, STRICT_MARGIN,
};
pub use margin::{relative_margin, Margin};
pub use sampling::{stratified_samples, unit_directions, AuditSamples, SampleCounts};
pub use terms::{t_terms, t_terms_from_jet, TTerms};

use geometry::GeometryError;
use thiserror::Error;
use weights::WeightsError;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("check {check} requires lambda >= {min}, got {lambda}")]
    Hypothesis { check: &'static str, lambda: f64, min: f64 },
    #[error("no lambda in the grid passes; at lambda = {lambda} the last failing check is {check}")]
    Exhausted { check: CheckId, failing: Vec<CheckId>, lambda: f64, report: Box<AuditReport> },
    #[error("empty lambda grid")]
    EmptyGrid,
    #[error("invalid audit option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    Weights(#[from] WeightsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
