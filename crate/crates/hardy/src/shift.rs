use linalg::{smallest_generalized_eigen, CsrMatrix, EnvelopeLdl, GeneralizedOptions, LinalgError};
use pde::{assemble, Discretization};

use crate::HardyError;

/// Bisection window and stopping rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bisection {
    pub c_max: f64,
    pub iterations: usize,
    /// Stop once the bracket is narrower than this.
    pub tol: f64,
}

impl Default for Bisection {
    fn default() -> Self {
        Self { c_max: 1e4, iterations: 40, tol: 1e-3 }
    }
}

/// `true` iff the symmetric matrix has a full positive inertia. A vanishing pivot counts as failure.
pub fn is_positive_definite(a: &CsrMatrix) -> Result<bool, HardyError> {
    match EnvelopeLdl::factor(a) {
        Ok(ldl) => Ok(ldl.is_positive_definite()),
        Err(LinalgError::ZeroPivot { .. }) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

/// Smallest `c` in `[0, c_max]` with `pass(c)`, assuming `pass` is monotone. Returns the passing
/// end of the final bracket, or `None` if `pass(c_max)` fails.
pub fn bisect_min<F>(mut pass: F, cfg: Bisection) -> Result<Option<f64>, HardyError>
where
    F: FnMut(f64) -> Result<bool, HardyError>,
{
    if pass(0.0)? {
        return Ok(Some(0.0));
    }
    if !pass(cfg.c_max)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, cfg.c_max);
    for _ in 0..cfg.iterations {
        if hi - lo <= cfg.tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pass(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftEstimate {
    pub gamma: f64,
    /// Subtracted multiple of `u^2 / |x|^2`, normally the critical constant.
    pub mu: f64,
    pub c0: f64,
    /// Smallest `nu` in `(K + c0 M - mu W_2) v = nu W_gamma v`; at least one by construction.
    pub nu_at_c0: f64,
    pub residual: f64,
}

/// Smallest `C >= 0` making `(int |grad u|^2 - mu u^2/|x|^2 + C u^2) / int u^2/|x|^gamma >= 1`,
/// tested through the inertia of `K + C M - mu W_2 - W_gamma`.
pub fn estimate_c0_gamma(disc: &Discretization, gamma: f64, mu: f64, cfg: Bisection) -> Result<ShiftEstimate, HardyError> {
    if !(0.0..2.0).contains(&gamma) {
        return Err(HardyError::InvalidParameter(format!("gamma must lie in [0, 2), got {gamma}")));
    }
    let w_gamma = disc.weighted_mass(gamma);
    let neg_w: Vec<f64> = w_gamma.iter().map(|w| -w).collect();
    let pass = |c: f64| is_positive_definite(&assemble(mu, disc, c).scale_add_diagonal(1.0, &neg_w));
    let c0 = bisect_min(pass, cfg)?.ok_or(HardyError::CapExceeded { c_max: cfg.c_max, gamma })?;
    let eig = smallest_generalized_eigen(&assemble(mu, disc, c0), &w_gamma, GeneralizedOptions::default())?;
    Ok(ShiftEstimate { gamma, mu, c0, nu_at_c0: eig.eigenvalue, residual: eig.residual })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub c3: f64,
    /// Smallest admissible `c2`, absent when even `c2_max` fails.
    pub c2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoercivitySweep {
    pub gamma: f64,
    pub mu: f64,
    pub rows: Vec<SweepRow>,
    /// Largest `c3` with a finite `c2`, paired with that `c2`.
    pub best: Option<(f64, f64)>,
}

/// For each `c3`, the smallest `c2` making
/// `K - mu W_2 + c2 M - c3 (K_{|x|^{2-gamma}} + W_gamma)` positive definite.
pub fn sweep_c2_c3(disc: &Discretization, gamma: f64, mu: f64, c3_grid: &[f64], cfg: Bisection) -> Result<CoercivitySweep, HardyError> {
    if !(0.0..2.0).contains(&gamma) {
        return Err(HardyError::InvalidParameter(format!("gamma must lie in [0, 2), got {gamma}")));
    }
    if c3_grid.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(HardyError::InvalidParameter("c3 grid values must be positive and finite".into()));
    }
    let kw = disc.weighted_stiffness(2.0 - gamma);
    let w_gamma = disc.weighted_mass(gamma);
    let base = assemble(mu, disc, 0.0);
    let mut rows = Vec::with_capacity(c3_grid.len());
    for &c3 in c3_grid {
        let scaled: Vec<f64> = w_gamma.iter().map(|w| -c3 * w).collect();
        let rhs = kw.scale_add_diagonal(c3, &scaled);
        let lhs = subtract(&base, &rhs);
        let pass = |c2: f64| is_positive_definite(&lhs.scale_add_diagonal(1.0, &disc.mass().iter().map(|m| c2 * m).collect::<Vec<_>>()));
        rows.push(SweepRow { c3, c2: bisect_min(pass, cfg)? });
    }
    let best = rows.iter().filter_map(|r| r.c2.map(|c2| (r.c3, c2))).max_by(|a, b| a.0.total_cmp(&b.0));
    Ok(CoercivitySweep { gamma, mu, rows, best })
}

fn subtract(a: &CsrMatrix, b: &CsrMatrix) -> CsrMatrix {
    let mut trip = Vec::with_capacity(a.nnz() + b.nnz());
    for i in 0..a.nrows() {
        let (c, v) = a.row(i);
        trip.extend(c.iter().zip(v).map(|(&j, &x)| (i, j, x)));
        let (c, v) = b.row(i);
        trip.extend(c.iter().zip(v).map(|(&j, &x)| (i, j, -x)));
    }
    CsrMatrix::from_triplets(a.nrows(), a.ncols(), &trip)
}
