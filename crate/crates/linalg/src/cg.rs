use crate::{axpy, LinalgError};

#[derive(Clone, Copy, Debug)]
pub struct CgOptions {
    /// Relative tolerance on the residual norm, measured against `||b||`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500 }
    }
}

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final residual norm in the supplied inner product.
    pub residual: f64,
    pub rhs_norm: f64,
    /// Residual norm after each iteration, starting with the initial one.
    pub history: Vec<f64>,
}

/// Conjugate gradients for an operator that is self-adjoint and positive
/// definite with respect to `inner`.
pub fn conjugate_gradient<A, I>(mut apply: A, inner: I, b: &[f64], x0: Option<&[f64]>, opts: CgOptions) -> Result<CgOutcome, LinalgError>
where
    A: FnMut(&[f64]) -> Result<Vec<f64>, LinalgError>,
    I: Fn(&[f64], &[f64]) -> f64,
{
    let n = b.len();
    let mut x = match x0 {
        Some(v) => {
            if v.len() != n {
                return Err(LinalgError::DimensionMismatch { expected: n, got: v.len() });
            }
            v.to_vec()
        }
        None => vec![0.0; n],
    };
    let rhs_norm = inner(b, b).max(0.0).sqrt();
    let mut r = b.to_vec();
    if x.iter().any(|&v| v != 0.0) {
        let ax = apply(&x)?;
        for (ri, ai) in r.iter_mut().zip(&ax) {
            *ri -= ai;
        }
    }
    let mut rr = inner(&r, &r);
    let mut history = vec![rr.max(0.0).sqrt()];
    if rhs_norm == 0.0 {
        return Ok(CgOutcome { x: vec![0.0; n], iterations: 0, residual: 0.0, rhs_norm, history });
    }
    let target = opts.tol * rhs_norm;
    let mut p = r.clone();
    let mut it = 0;
    while rr.sqrt() > target {
        if it >= opts.max_iter {
            return Err(LinalgError::NoConvergence { iterations: it, residual: rr.sqrt() });
        }
        let ap = apply(&p)?;
        let pap = inner(&p, &ap);
        if !(pap > 0.0) {
            return Err(LinalgError::Breakdown(format!("non-positive curvature {pap:e} at iteration {it}")));
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = inner(&r, &r);
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
        it += 1;
        history.push(rr.max(0.0).sqrt());
    }
    Ok(CgOutcome { x, iterations: it, residual: rr.sqrt(), rhs_norm, history })
}
