use linalg::{smallest_generalized_eigen, GeneralizedOptions};
use pde::{assemble, critical_mu, Discretization, Mesh, PolarSpec};
use rayon::prelude::*;

use crate::HardyError;

/// Largest accepted `||(K + C M) v - mu W v|| / ||v||`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Allowed increase of the estimate between consecutive refinements.
pub const MONOTONE_SLACK: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Placement {
    /// Singular point on the boundary.
    Boundary,
    /// Singular point inside the domain, pinned to zero.
    Interior,
}

impl Placement {
    pub fn as_str(self) -> &'static str {
        match self {
            Placement::Boundary => "boundary",
            Placement::Interior => "interior",
        }
    }

    /// Continuum best constant: `N^2 / 4` on the boundary, `(N - 2)^2 / 4` inside.
    pub fn continuum_constant(self, dim: usize) -> f64 {
        match self {
            Placement::Boundary => critical_mu(dim),
            Placement::Interior => ((dim as f64) - 2.0).powi(2) / 4.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HardyEstimate {
    pub constant: f64,
    pub residual: f64,
    /// Ground state, `W`-normalized and nonnegative in sum.
    pub vector: Vec<f64>,
    pub lanczos_steps: usize,
}

/// Smallest `mu` in `(K + C M) v = mu W_s v`, the discrete infimum of
/// `(int |grad u|^2 + C u^2) / int u^2 |x|^-s`.
pub fn best_hardy_constant(disc: &Discretization, weight_exponent: f64, shift: f64) -> Result<HardyEstimate, HardyError> {
    let a = assemble(0.0, disc, shift);
    let w = disc.weighted_mass(weight_exponent);
    let eig = smallest_generalized_eigen(&a, &w, GeneralizedOptions::default())?;
    if !(eig.residual <= RESIDUAL_TOL) {
        return Err(HardyError::Residual { residual: eig.residual, tol: RESIDUAL_TOL });
    }
    Ok(HardyEstimate { constant: eig.eigenvalue, residual: eig.residual, vector: eig.vector, lanczos_steps: eig.lanczos_steps })
}

/// One refinement level of a study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LevelSpec {
    Interval { cells: usize },
    Polar(PolarSpec),
}

/// Domain family of a study: `(0, size)` in one dimension; in two, the disk of radius `size`
/// tangent at the origin (boundary) or centred there (interior).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardyCase {
    pub placement: Placement,
    pub dim: usize,
    pub size: f64,
}

impl HardyCase {
    pub fn mesh(&self, level: LevelSpec) -> Result<Mesh, HardyError> {
        let mesh = match (self.dim, self.placement, level) {
            (1, Placement::Boundary, LevelSpec::Interval { cells }) => Mesh::interval(self.size, cells)?,
            (2, Placement::Boundary, LevelSpec::Polar(p)) => Mesh::tangent_disk(self.size, p)?,
            (2, Placement::Interior, LevelSpec::Polar(p)) => Mesh::centered_disk(self.size, p)?,
            _ => {
                return Err(HardyError::InvalidParameter(format!(
                    "no mesh for {}-dimensional {} placement with level {level:?}",
                    self.dim,
                    self.placement.as_str()
                )))
            }
        };
        Ok(mesh)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardyLevel {
    pub level: LevelSpec,
    pub h: f64,
    pub dofs: usize,
    pub constant: f64,
    pub residual: f64,
    pub lanczos_steps: usize,
    /// Whether the sign-normalized ground state has no negative entry.
    pub ground_state_positive: bool,
}

/// Least-squares line `constant ~ intercept + slope ln h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogMeshFit {
    pub intercept: f64,
    pub slope: f64,
}

impl LogMeshFit {
    pub fn fit(h: &[f64], values: &[f64]) -> Option<Self> {
        let n = h.len();
        if n < 2 || values.len() != n {
            return None;
        }
        let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = values.iter().sum::<f64>() / n as f64;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if !(sxx > 0.0) {
            return None;
        }
        let sxy: f64 = xs.iter().zip(values).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        Some(Self { intercept: my - slope * mx, slope })
    }

    pub fn at(&self, h: f64) -> f64 {
        self.intercept + self.slope * h.ln()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardyReport {
    pub case: HardyCase,
    pub weight_exponent: f64,
    pub shift: f64,
    pub levels: Vec<HardyLevel>,
    pub fit: Option<LogMeshFit>,
    pub flags: Vec<String>,
}

impl HardyReport {
    pub fn finest(&self) -> Option<&HardyLevel> {
        self.levels.last()
    }

    /// Estimates never increase by more than the slack from one level to the next.
    pub fn monotone(&self) -> bool {
        self.levels.windows(2).all(|w| w[1].constant <= w[0].constant + MONOTONE_SLACK)
    }
}

/// Runs [`best_hardy_constant`] on each level (levels in parallel, results in input order)
/// and flags non-monotone refinement or values below the continuum constant.
pub fn hardy_study(case: HardyCase, levels: &[LevelSpec], weight_exponent: f64, shift: f64) -> Result<HardyReport, HardyError> {
    let results: Vec<Result<HardyLevel, HardyError>> = levels
        .par_iter()
        .map(|&level| {
            let disc = Discretization::new(case.mesh(level)?)?;
            let est = best_hardy_constant(&disc, weight_exponent, shift)?;
            Ok(HardyLevel {
                level,
                h: disc.h(),
                dofs: disc.len(),
                constant: est.constant,
                residual: est.residual,
                lanczos_steps: est.lanczos_steps,
                ground_state_positive: est.vector.iter().all(|&v| v >= -1e-12 * est.vector.iter().fold(0.0f64, |m, x| m.max(x.abs()))),
            })
        })
        .collect();
    let levels: Vec<HardyLevel> = results.into_iter().collect::<Result<_, _>>()?;
    let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let values: Vec<f64> = levels.iter().map(|l| l.constant).collect();
    let mut report = HardyReport { case, weight_exponent, shift, fit: LogMeshFit::fit(&h, &values), levels, flags: Vec::new() };
    if !report.monotone() {
        report.flags.push("nonmonotone_refinement".into());
    }
    if weight_exponent == 2.0 && shift == 0.0 {
        let floor = case.placement.continuum_constant(case.dim) - 1e-6;
        if case.placement == Placement::Boundary && report.levels.iter().any(|l| l.constant < floor) {
            report.flags.push("below_continuum_constant".into());
        }
    }
    if report.levels.iter().any(|l| !l.ground_state_positive) {
        report.flags.push("ground_state_sign_change".into());
    }
    Ok(report)
}
