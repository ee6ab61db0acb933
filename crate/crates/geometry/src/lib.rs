//! Domains whose boundary passes through the origin.
//!
//! Three canonical shapes are supported: the interval `(0, L)`, the disk of
//! radius `R` centred at `R e_N` (tangent to the origin from above) and the
//! parabolic cap `{x_N >= beta |x'|^2, |x| <= r_1}`. Each exposes the boundary
//! distance `rho`, the nearest-point projection, outward normals and the
//! sampled constants `C_Omega` (tangency) and `E_Omega` (projection growth).

mod cubic;
mod domain;
mod regions;

pub use domain::{DomainGeometry, DomainKind, Shape, SAFETY_FACTOR};
pub use regions::{region_classify, RegionClass, Regions, SubsetShape};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point {point:?} is outside the domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("projection of {point:?} is not unique: rho = {distance} >= beta0 = {beta0}")]
    NonUniqueProjection { point: Vec<f64>, distance: f64, beta0: f64 },
    #[error("point {point:?} is not on the boundary (distance {distance:e})")]
    NotOnBoundary { point: Vec<f64>, distance: f64 },
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
}
