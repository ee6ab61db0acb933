use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::problem::ControlProblem;
use crate::ControlError;

/// Largest number of unknowns for which the Gramian is assembled densely.
pub const MAX_DENSE_UNKNOWNS: usize = 2000;
/// Regularization `eta = ETA_REL ||Lambda||` added to the observed energy. The unregularized
/// quotient keeps growing like `log(1 / eta)` as terminal data concentrate in the
/// near-kernel of the Gramian, so the regularized maximum is what gets reported.
pub const ETA_REL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ObservabilityEstimate {
    /// `max ||w(0)||^2 / (sum_n dt ||1_omega Q* w^n||^2 + eta ||w_T||^2)` over terminal data.
    pub constant: f64,
    /// `||G v - C (Lambda + eta) v|| / (C ||(Lambda + eta) v||)` for the maximizer, in the `M` norm.
    pub residual: f64,
    pub eta: f64,
    /// Observed energy of the `M`-normalized maximizer.
    pub denominator: f64,
    pub gramian_norm: f64,
    /// Terminal data attaining the maximum, `M`-normalized.
    pub maximizer: Vec<f64>,
}

/// Discrete observability constant from the dense Gramian `Lambda` and the initial-energy
/// operator `G = E* E`, with `E` the backward march `w_T -> w(0)`.
pub fn observability_constant(problem: &ControlProblem) -> Result<ObservabilityEstimate, ControlError> {
    let n = problem.len();
    if n > MAX_DENSE_UNKNOWNS {
        return Err(ControlError::InvalidParameter(format!("{n} unknowns exceed the dense limit {MAX_DENSE_UNKNOWNS}")));
    }
    let mass = problem.disc().mass();
    let sqrt_m: Vec<f64> = mass.iter().map(|m| m.sqrt()).collect();
    // Columns for the M-orthonormal basis e_j / sqrt(m_j): symmetric matrices in that basis.
    let mut lambda = DMatrix::zeros(n, n);
    let mut initial = DMatrix::zeros(n, n);
    let mut unit = vec![0.0; n];
    for j in 0..n {
        unit[j] = 1.0 / sqrt_m[j];
        let obs = problem.observe(&unit)?;
        let zero = vec![0.0; n];
        let lam = problem.terminal_state(&zero, &obs.controls)?;
        for i in 0..n {
            lambda[(i, j)] = sqrt_m[i] * lam[i];
            initial[(i, j)] = sqrt_m[i] * obs.initial[i];
        }
        unit[j] = 0.0;
    }
    let lambda = 0.5 * (&lambda + lambda.transpose());
    let g = initial.transpose() * &initial;
    let gramian_norm = SymmetricEigen::new(lambda.clone()).eigenvalues.amax();
    if !(gramian_norm > 0.0) {
        return Err(ControlError::DegenerateObservation { denominator: gramian_norm });
    }
    let eta = ETA_REL * gramian_norm;
    let shifted = &lambda + DMatrix::identity(n, n) * eta;
    let chol = shifted.clone().cholesky().ok_or(ControlError::DegenerateObservation { denominator: eta })?;
    let l_inv = chol.l().try_inverse().ok_or(ControlError::DegenerateObservation { denominator: eta })?;
    let reduced = &l_inv * &g * l_inv.transpose();
    let reduced = 0.5 * (&reduced + reduced.transpose());
    let eig = SymmetricEigen::new(reduced);
    let k = eig.eigenvalues.imax();
    let constant = eig.eigenvalues[k];
    let y = eig.eigenvectors.column(k).into_owned();
    let mut v: DVector<f64> = l_inv.transpose() * y;
    v /= v.norm();
    let denominator = (v.transpose() * &lambda * &v)[(0, 0)];
    if !(denominator > 1e-3 * eta) {
        return Err(ControlError::DegenerateObservation { denominator });
    }
    let av = &shifted * &v;
    let residual = (&g * &v - constant * &av).norm() / (constant * av.norm());
    let maximizer = v.iter().zip(&sqrt_m).map(|(x, s)| x / s).collect();
    Ok(ObservabilityEstimate { constant, residual, eta, denominator, gramian_norm, maximizer })
}

#[cfg(test)]
mod tests {
    use super::*;
    use geometry::SubsetShape;
    use pde::{Discretization, Mesh, Scheme};

    #[test]
    fn maximizer_attains_the_quotient() {
        let disc = Discretization::new(Mesh::interval(1.0, 32).unwrap()).unwrap();
        let p = ControlProblem::new(&disc, 0.1, Scheme::ImplicitEuler, 0.2, 0.01, &SubsetShape::Interval { a: 0.5, b: 0.8 }).unwrap();
        let est = observability_constant(&p).unwrap();
        let obs = p.observe(&est.maximizer).unwrap();
        let q = p.inner(&obs.initial, &obs.initial) / (p.control_energy(&obs.controls) + est.eta * p.inner(&est.maximizer, &est.maximizer));
        assert!((q / est.constant - 1.0).abs() < 1e-6, "{q} vs {}", est.constant);
        assert!(est.residual < 1e-8);
    }

    #[test]
    fn empty_control_set_is_degenerate() {
        let disc = Discretization::new(Mesh::interval(1.0, 16).unwrap()).unwrap();
        let p = ControlProblem::new(&disc, 0.0, Scheme::ImplicitEuler, 0.2, 0.02, &SubsetShape::Interval { a: 0.61, b: 0.62 }).unwrap();
        assert!(matches!(observability_constant(&p), Err(ControlError::DegenerateObservation { .. })));
    }
}
