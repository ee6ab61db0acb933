use nalgebra::{DMatrix, SymmetricEigen};

use crate::{axpy, weighted_dot, LinalgError};

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub max_steps: usize,
    /// Convergence test `|beta_m s_m| <= tol * |theta|` on the Ritz estimate.
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { max_steps: 300, tol: 1e-13 }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosOutcome {
    pub eigenvalue: f64,
    /// Ritz vector normalized in the weighted inner product.
    pub vector: Vec<f64>,
    pub steps: usize,
    pub ritz_residual: f64,
}

/// Largest eigenpair of an operator self-adjoint in the inner product
/// `<u, v>_w = sum w_i u_i v_i`, by Lanczos with full reorthogonalization.
pub fn lanczos_largest<A>(mut apply: A, w: &[f64], start: &[f64], opts: LanczosOptions) -> Result<LanczosOutcome, LinalgError>
where
    A: FnMut(&[f64]) -> Vec<f64>,
{
    let n = w.len();
    if start.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, got: start.len() });
    }
    let nrm = weighted_dot(w, start, start).sqrt();
    if !(nrm > 0.0) {
        return Err(LinalgError::Breakdown("zero start vector".into()));
    }
    let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|v| v / nrm).collect()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let max_steps = opts.max_steps.min(n);
    let mut last = (0.0, f64::INFINITY, Vec::new());
    for m in 0..max_steps {
        let mut v = apply(&basis[m]);
        let a = weighted_dot(w, &basis[m], &v);
        alphas.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = weighted_dot(w, q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let b = weighted_dot(w, &v, &v).sqrt();
        let k = alphas.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alphas[i];
            if i + 1 < k {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imax, &theta) = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
        let s = eig.eigenvectors.column(imax).clone_owned();
        let est = (b * s[k - 1]).abs();
        last = (theta, est, s.iter().copied().collect::<Vec<f64>>());
        let invariant = b <= 1e-14 * theta.abs().max(1e-300);
        if est <= opts.tol * theta.abs() || invariant || m + 1 == max_steps {
            let mut vec = vec![0.0; n];
            for (j, q) in basis.iter().enumerate() {
                axpy(last.2[j], q, &mut vec);
            }
            let converged = est <= opts.tol * theta.abs() || invariant;
            if !converged {
                return Err(LinalgError::NoConvergence { iterations: m + 1, residual: est });
            }
            return Ok(LanczosOutcome { eigenvalue: theta, vector: vec, steps: m + 1, ritz_residual: est });
        }
        betas.push(b);
        basis.push(v.iter().map(|x| x / b).collect());
    }
    Err(LinalgError::NoConvergence { iterations: max_steps, residual: last.1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_operator_largest_eigenvalue() {
        let d: Vec<f64> = (1..=40).map(|i| i as f64).collect();
        let w = vec![1.0; 40];
        let start = vec![1.0; 40];
        let out = lanczos_largest(|v| v.iter().zip(&d).map(|(a, b)| a * b).collect(), &w, &start, LanczosOptions::default()).unwrap();
        assert!((out.eigenvalue - 40.0).abs() < 1e-10);
        assert!((out.vector[39].abs() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn generalized_weighted_problem() {
        // K v = mu W v with K = diag(k), W = diag(w): eigenvalues k_i / w_i.
        let k = [4.0, 1.0, 9.0, 2.0];
        let w = [2.0, 4.0, 1.0, 1.0];
        // operator K^{-1} W is self-adjoint in the W inner product
        let op = |v: &[f64]| -> Vec<f64> { (0..4).map(|i| w[i] * v[i] / k[i]).collect() };
        let out = lanczos_largest(op, &w, &[1.0; 4], LanczosOptions::default()).unwrap();
        // largest of w/k = 4.0 at index 1 -> smallest mu = 0.25
        assert!((out.eigenvalue - 4.0).abs() < 1e-12);
    }
}
