use geometry::SubsetShape;
use nalgebra::DVector;
use pde::{solve_adjoint, solve_forward, Discretization, Propagator, Record, Scheme, TimeGrid};

use crate::ControlError;

/// Distributed control problem `u' - Delta u - mu u/|x|^2 = f 1_omega` on `(0, T)` with Dirichlet data.
///
/// Controls are nodal, one vector per time step, and the Gramian is the exact
/// composition of the discrete forward map with its `M`-adjoint.
pub struct ControlProblem<'a> {
    disc: &'a Discretization,
    prop: Propagator,
    grid: TimeGrid,
    mask: Vec<f64>,
    mu: f64,
}

impl<'a> ControlProblem<'a> {
    /// Rejects `mu` above the critical constant `N^2/4`. Steps are at most `dt_max`.
    pub fn new(
        disc: &'a Discretization,
        mu: f64,
        scheme: Scheme,
        horizon: f64,
        dt_max: f64,
        omega: &SubsetShape,
    ) -> Result<Self, ControlError> {
        let critical = disc.critical_mu();
        if !(mu <= critical) {
            return Err(ControlError::Supercritical { mu, critical });
        }
        if omega.dim() != disc.dim() {
            return Err(ControlError::InvalidParameter(format!("control set has dimension {}, mesh has {}", omega.dim(), disc.dim())));
        }
        let grid = TimeGrid::with_max_step(horizon, dt_max)?;
        let prop = Propagator::new(disc, mu, scheme, grid.dt())?;
        let mask =
            disc.mesh().dof_points().iter().map(|p| if omega.contains(&DVector::from_column_slice(p)) { 1.0 } else { 0.0 }).collect();
        Ok(Self { disc, prop, grid, mask, mu })
    }

    pub fn disc(&self) -> &Discretization {
        self.disc
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon
    }

    /// Indicator of the control set at the unknowns.
    pub fn mask(&self) -> &[f64] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.disc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disc.is_empty()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.disc.inner(a, b)
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.disc.norm(a)
    }

    /// `u(T)` with zero control.
    pub fn free_terminal_state(&self, u0: &[f64]) -> Result<Vec<f64>, ControlError> {
        Ok(solve_forward(&self.prop, u0, None, self.grid, Record::NormsOnly)?.end_state)
    }

    /// `u(T)` for the given per-step controls.
    pub fn terminal_state(&self, u0: &[f64], controls: &[Vec<f64>]) -> Result<Vec<f64>, ControlError> {
        Ok(solve_forward(&self.prop, u0, Some(controls), self.grid, Record::NormsOnly)?.end_state)
    }

    /// Adjoint of the control-to-terminal-state map: the control of step `n` is
    /// `1_omega Q* w^n`, where `w` marches backward from `w_t`.
    pub fn observe(&self, w_t: &[f64]) -> Result<Observation, ControlError> {
        let traj = solve_adjoint(&self.prop, w_t, self.grid, Record::Every(1))?;
        let controls = traj.snapshots[1..]
            .iter()
            .map(|s| self.prop.source_adjoint(&s.values).iter().zip(&self.mask).map(|(v, m)| v * m).collect())
            .collect();
        Ok(Observation { controls, initial: traj.end_state })
    }

    /// `Lambda w_t`: observe, then drive the state from rest with the observed control.
    pub fn gramian_apply(&self, w_t: &[f64]) -> Result<Vec<f64>, ControlError> {
        let obs = self.observe(w_t)?;
        self.terminal_state(&vec![0.0; self.len()], &obs.controls)
    }

    /// `sum_n dt ||g_n||_M^2`, the discrete `L^2(omega x (0, T))` energy of a control.
    pub fn control_energy(&self, controls: &[Vec<f64>]) -> f64 {
        self.grid.dt() * controls.iter().map(|g| self.disc.inner(g, g)).sum::<f64>()
    }
}

/// Result of one backward observation sweep.
#[derive(Clone, Debug)]
pub struct Observation {
    /// Masked control for steps `1..=N`.
    pub controls: Vec<Vec<f64>>,
    /// `w(0)`.
    pub initial: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use pde::Mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> Discretization {
        Discretization::new(Mesh::interval(1.0, 64).unwrap()).unwrap()
    }

    fn omega() -> SubsetShape {
        SubsetShape::Interval { a: 0.6, b: 0.8 }
    }

    #[test]
    fn zero_terminal_data_gives_zero() {
        let disc = setup();
        let p = ControlProblem::new(&disc, 0.1, Scheme::ImplicitEuler, 0.2, 0.01, &omega()).unwrap();
        assert!(p.gramian_apply(&vec![0.0; disc.len()]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gramian_quadratic_form_is_the_observed_energy() {
        let disc = setup();
        let p = ControlProblem::new(&disc, 0.2, Scheme::ImplicitEuler, 0.2, 0.01, &omega()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..disc.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lhs = p.inner(&p.gramian_apply(&a).unwrap(), &a);
        let rhs = p.control_energy(&p.observe(&a).unwrap().controls);
        assert!(rhs > 0.0 && (lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn controls_vanish_outside_omega() {
        let disc = setup();
        let p = ControlProblem::new(&disc, 0.0, Scheme::CrankNicolson, 0.1, 0.01, &omega()).unwrap();
        let obs = p.observe(&vec![1.0; disc.len()]).unwrap();
        let pts = disc.mesh().dof_points();
        for g in &obs.controls {
            for (v, x) in g.iter().zip(&pts) {
                if !(x[0] > 0.6 && x[0] < 0.8) {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }

    #[test]
    fn supercritical_mu_is_rejected() {
        let disc = setup();
        let e = ControlProblem::new(&disc, 0.3, Scheme::ImplicitEuler, 0.2, 0.01, &omega());
        assert!(matches!(e, Err(ControlError::Supercritical { .. })));
        assert!(ControlProblem::new(&disc, 0.25, Scheme::ImplicitEuler, 0.2, 0.01, &omega()).is_ok());
    }
}
