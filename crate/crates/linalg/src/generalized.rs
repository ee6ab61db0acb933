use crate::{lanczos_largest, weighted_dot, CsrMatrix, EnvelopeLdl, LanczosOptions, LinalgError};

/// Smallest eigenpair of `A v = nu B v` with `A` symmetric and `B` a positive diagonal.
#[derive(Clone, Debug)]
pub struct GeneralizedEigen {
    pub eigenvalue: f64,
    /// Normalized so that `v^T B v = 1`, with a nonnegative component sum.
    pub vector: Vec<f64>,
    /// `||A v - nu B v||_2 / ||v||_2`.
    pub residual: f64,
    /// Shift `sigma` such that `A + sigma B` was factored.
    pub shift: f64,
    pub lanczos_steps: usize,
    pub refinement_steps: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct GeneralizedOptions {
    pub lanczos: LanczosOptions,
    /// Target for the residual after Lanczos; inverse iteration polishes until reached.
    pub residual_tol: f64,
    pub max_refinement: usize,
}

impl Default for GeneralizedOptions {
    fn default() -> Self {
        Self { lanczos: LanczosOptions::default(), residual_tol: 1e-10, max_refinement: 50 }
    }
}

/// Factors `A + sigma B` for the smallest tried `sigma >= 0` that makes it positive definite.
///
/// Shifts are tried as `0` and then `g 2^-k` for `k = 30, 29, ...`, where `g` is a
/// Gershgorin bound guaranteeing definiteness.
pub fn definite_shift(a: &CsrMatrix, b: &[f64]) -> Result<(f64, EnvelopeLdl), LinalgError> {
    check_diag(a, b)?;
    if let Ok(f) = EnvelopeLdl::factor(a) {
        if f.is_positive_definite() {
            return Ok((0.0, f));
        }
    }
    let mut g: f64 = 0.0;
    for (i, bi) in b.iter().enumerate() {
        let (cols, vals) = a.row(i);
        let mut off = 0.0;
        let mut diag = 0.0;
        for (&c, &v) in cols.iter().zip(vals) {
            if c == i {
                diag += v;
            } else {
                off += v.abs();
            }
        }
        g = g.max((off - diag) / bi);
    }
    let g = 2.0 * g.max(f64::MIN_POSITIVE);
    for k in (0..=30).rev() {
        let sigma = g * 0.5f64.powi(k);
        let d: Vec<f64> = b.iter().map(|w| sigma * w).collect();
        let shifted = a.scale_add_diagonal(1.0, &d);
        if let Ok(f) = EnvelopeLdl::factor(&shifted) {
            if f.is_positive_definite() {
                return Ok((sigma, f));
            }
        }
    }
    Err(LinalgError::Breakdown("no definite shift found below the Gershgorin bound".into()))
}

/// Smallest generalized eigenpair by shift-invert Lanczos in the `B` inner product,
/// followed by inverse-iteration polishing.
pub fn smallest_generalized_eigen(a: &CsrMatrix, b: &[f64], opts: GeneralizedOptions) -> Result<GeneralizedEigen, LinalgError> {
    let (sigma, fac) = definite_shift(a, b)?;
    let op = |v: &[f64]| -> Vec<f64> {
        let mut y: Vec<f64> = v.iter().zip(b).map(|(x, w)| x * w).collect();
        fac.solve_in_place(&mut y);
        y
    };
    let start = vec![1.0; b.len()];
    let out = lanczos_largest(op, b, &start, opts.lanczos)?;
    let mut v = out.vector;
    normalize_b(b, &mut v);
    let mut nu = rayleigh(a, b, &v);
    let mut residual = residual_norm(a, b, &v, nu);
    let mut refinement_steps = 0;
    while residual > opts.residual_tol && refinement_steps < opts.max_refinement {
        v = op(&v);
        normalize_b(b, &mut v);
        nu = rayleigh(a, b, &v);
        residual = residual_norm(a, b, &v, nu);
        refinement_steps += 1;
    }
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(GeneralizedEigen { eigenvalue: nu, vector: v, residual, shift: sigma, lanczos_steps: out.steps, refinement_steps })
}

fn check_diag(a: &CsrMatrix, b: &[f64]) -> Result<(), LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if b.len() != a.nrows() {
        return Err(LinalgError::DimensionMismatch { expected: a.nrows(), got: b.len() });
    }
    if b.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(LinalgError::Breakdown("weight diagonal must be positive and finite".into()));
    }
    Ok(())
}

fn normalize_b(b: &[f64], v: &mut [f64]) {
    let n = weighted_dot(b, v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

fn rayleigh(a: &CsrMatrix, b: &[f64], v: &[f64]) -> f64 {
    a.quadratic_form(v) / weighted_dot(b, v, v)
}

fn residual_norm(a: &CsrMatrix, b: &[f64], v: &[f64], nu: f64) -> f64 {
    let av = a.mul_vec(v);
    let r: f64 = av.iter().zip(v.iter().zip(b)).map(|(x, (vi, bi))| (x - nu * bi * vi).powi(2)).sum();
    let vn: f64 = v.iter().map(|x| x * x).sum();
    (r / vn).sqrt()
}
