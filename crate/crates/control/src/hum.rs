use linalg::{conjugate_gradient, CgOptions, LinalgError};

use crate::problem::ControlProblem;
use crate::ControlError;

/// Allowed factor on the CG residual in the terminal-norm audit.
pub const AUDIT_SLACK: f64 = 10.0;

#[derive(Clone, Copy, Debug)]
pub struct HumOptions {
    pub epsilon: f64,
    pub cg: CgOptions,
}

impl Default for HumOptions {
    fn default() -> Self {
        Self { epsilon: 1e-6, cg: CgOptions::default() }
    }
}

#[derive(Clone, Debug)]
pub struct ControlResult {
    /// Control of step `n` at index `n - 1`, zero outside the control set.
    pub control: Vec<Vec<f64>>,
    pub epsilon: f64,
    /// `||u(T)||` from an independent forward solve with `control`.
    pub terminal_norm: f64,
    pub free_terminal_norm: f64,
    /// `||w_T||` at the optimum.
    pub adjoint_norm: f64,
    /// `(1/2) ||f||^2 + ||u(T)||^2 / (2 epsilon)`.
    pub cost: f64,
    pub control_norm: f64,
    pub iterations: usize,
    pub cg_residual: f64,
    pub residual_history: Vec<f64>,
}

impl ControlResult {
    pub fn relative_terminal_norm(&self) -> f64 {
        if self.free_terminal_norm == 0.0 {
            0.0
        } else {
            self.terminal_norm / self.free_terminal_norm
        }
    }

    /// Optimality gives `u(T) = -epsilon w_T - r` with `r` the CG residual.
    pub fn terminal_audit_ok(&self) -> bool {
        self.terminal_norm <= self.epsilon * self.adjoint_norm + AUDIT_SLACK * self.cg_residual + 1e-15 * self.free_terminal_norm
    }
}

/// Penalized HUM: solves `(Lambda + epsilon I) w_T = -u_free(T)` by CG in the `M` inner product and
/// returns the control observed from `w_T`.
pub fn hum_control(problem: &ControlProblem, u0: &[f64], opts: HumOptions) -> Result<ControlResult, ControlError> {
    if !(opts.epsilon > 0.0 && opts.epsilon.is_finite()) {
        return Err(ControlError::InvalidParameter(format!("epsilon must be positive, got {}", opts.epsilon)));
    }
    if u0.len() != problem.len() {
        return Err(ControlError::InvalidParameter(format!("initial state has {} values, expected {}", u0.len(), problem.len())));
    }
    let free = problem.free_terminal_state(u0)?;
    let rhs: Vec<f64> = free.iter().map(|v| -v).collect();
    let mut solver_error = None;
    let apply = |w: &[f64]| -> Result<Vec<f64>, LinalgError> {
        match problem.gramian_apply(w) {
            Ok(mut y) => {
                y.iter_mut().zip(w).for_each(|(yi, wi)| *yi += opts.epsilon * wi);
                Ok(y)
            }
            Err(e) => {
                let msg = e.to_string();
                solver_error = Some(e);
                Err(LinalgError::Breakdown(msg))
            }
        }
    };
    let cg = match conjugate_gradient(apply, |a, b| problem.inner(a, b), &rhs, None, opts.cg) {
        Ok(out) => out,
        Err(LinalgError::NoConvergence { iterations, residual }) => return Err(ControlError::CgStagnation { iterations, residual }),
        Err(e) => return Err(solver_error.take().unwrap_or(ControlError::Linalg(e))),
    };
    let control = problem.observe(&cg.x)?.controls;
    let terminal = problem.terminal_state(u0, &control)?;
    let terminal_norm = problem.norm(&terminal);
    let energy = problem.control_energy(&control);
    Ok(ControlResult {
        epsilon: opts.epsilon,
        terminal_norm,
        free_terminal_norm: problem.norm(&free),
        adjoint_norm: problem.norm(&cg.x),
        cost: 0.5 * energy + terminal_norm * terminal_norm / (2.0 * opts.epsilon),
        control_norm: energy.sqrt(),
        iterations: cg.iterations,
        cg_residual: cg.residual,
        residual_history: cg.history,
        control,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use geometry::SubsetShape;
    use pde::{Discretization, Mesh, Scheme};

    #[test]
    fn zero_initial_state_needs_no_control() {
        let disc = Discretization::new(Mesh::interval(1.0, 32).unwrap()).unwrap();
        let p = ControlProblem::new(&disc, 0.0, Scheme::ImplicitEuler, 0.2, 0.02, &SubsetShape::Interval { a: 0.6, b: 0.8 }).unwrap();
        let r = hum_control(&p, &vec![0.0; disc.len()], HumOptions::default()).unwrap();
        assert_eq!(r.terminal_norm, 0.0);
        assert_eq!(r.iterations, 0);
        assert!(r.control.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn nonpositive_penalty_is_rejected() {
        let disc = Discretization::new(Mesh::interval(1.0, 16).unwrap()).unwrap();
        let p = ControlProblem::new(&disc, 0.0, Scheme::ImplicitEuler, 0.2, 0.02, &SubsetShape::Interval { a: 0.6, b: 0.8 }).unwrap();
        let opts = HumOptions { epsilon: 0.0, ..HumOptions::default() };
        assert!(hum_control(&p, &vec![1.0; disc.len()], opts).is_err());
    }

    #[test]
    fn iteration_cap_reports_stagnation() {
        let disc = Discretization::new(Mesh::interval(1.0, 32).unwrap()).unwrap();
        let p = ControlProblem::new(&disc, 0.0, Scheme::ImplicitEuler, 0.2, 0.02, &SubsetShape::Interval { a: 0.6, b: 0.8 }).unwrap();
        let u0 = disc.mesh().interpolate(|x| (std::f64::consts::PI * x[0]).sin());
        let opts = HumOptions { epsilon: 1e-8, cg: CgOptions { tol: 1e-14, max_iter: 2 } };
        assert!(matches!(hum_control(&p, &u0, opts), Err(ControlError::CgStagnation { iterations: 2, .. })));
    }
}
