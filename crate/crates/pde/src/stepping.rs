use linalg::{CsrMatrix, EnvelopeLdl};

use crate::assembly::{assemble, Discretization};
use crate::PdeError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    ImplicitEuler,
    CrankNicolson,
}

impl Scheme {
    pub fn theta(self) -> f64 {
        match self {
            Scheme::ImplicitEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::ImplicitEuler => "implicit_euler",
            Scheme::CrankNicolson => "crank_nicolson",
        }
    }

    /// Amplification factor of one step on a generalized eigenmode `A v = nu M v`.
    pub fn amplification(self, nu: f64, dt: f64) -> f64 {
        let th = self.theta();
        (1.0 - (1.0 - th) * dt * nu) / (1.0 + th * dt * nu)
    }
}

/// Uniform time grid `t_n = n T / steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub horizon: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self, PdeError> {
        if !(horizon > 0.0 && horizon.is_finite()) || steps == 0 {
            return Err(PdeError::InvalidTimeStep(format!("need T > 0 and at least one step, got T = {horizon}, steps = {steps}")));
        }
        Ok(Self { horizon, steps })
    }

    /// Fewest uniform steps of size at most `dt_max`.
    pub fn with_max_step(horizon: f64, dt_max: f64) -> Result<Self, PdeError> {
        if !(dt_max > 0.0) {
            return Err(PdeError::InvalidTimeStep(format!("dt must be positive, got {dt_max}")));
        }
        Self::new(horizon, ((horizon / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize)
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.horizon
        } else {
            n as f64 * self.dt()
        }
    }
}

/// One θ-step of `M u' + A u = M g` with `A = K - mu W_2`:
/// `(M + θ dt A) u_new = (M - (1 - θ) dt A) u + dt M g`.
///
/// The adjoint step applies the `M`-transpose of the same map, so forward and
/// backward marches are exactly dual in the lumped `M` inner product.
#[derive(Clone, Debug)]
pub struct Propagator {
    scheme: Scheme,
    dt: f64,
    mu: f64,
    mass: Vec<f64>,
    operator: CsrMatrix,
    explicit: CsrMatrix,
    explicit_t: CsrMatrix,
    implicit: EnvelopeLdl,
}

impl Propagator {
    pub fn new(disc: &Discretization, mu: f64, scheme: Scheme, dt: f64) -> Result<Self, PdeError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(PdeError::InvalidTimeStep(format!("dt must be positive, got {dt}")));
        }
        if scheme == Scheme::CrankNicolson && dt > disc.h() * (1.0 + 1e-12) {
            return Err(PdeError::InvalidTimeStep(format!("Crank-Nicolson requires dt <= h, got dt = {dt}, h = {}", disc.h())));
        }
        if !mu.is_finite() {
            return Err(PdeError::InvalidParameter(format!("mu must be finite, got {mu}")));
        }
        let operator = assemble(mu, disc, 0.0);
        let th = scheme.theta();
        let lhs = operator.scale_add_diagonal(th * dt, disc.mass());
        let implicit = EnvelopeLdl::factor(&lhs).map_err(|e| PdeError::Solver { context: "factoring M + theta dt A".into(), source: e })?;
        if !implicit.is_positive_definite() {
            let row = implicit.pivots().iter().position(|&d| d <= 0.0).unwrap_or(0);
            return Err(PdeError::NotDefinite { row, dt });
        }
        let explicit = operator.scale_add_diagonal(-(1.0 - th) * dt, disc.mass());
        let explicit_t = transpose(&explicit);
        Ok(Self { scheme, dt, mu, mass: disc.mass().to_vec(), operator, explicit, explicit_t, implicit })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// `K - mu W_2`.
    pub fn operator(&self) -> &CsrMatrix {
        &self.operator
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `u <- S u + dt Q g`, where `g` is the nodal source for the step.
    pub fn step(&self, u: &[f64], source: Option<&[f64]>) -> Vec<f64> {
        let mut y = self.explicit.mul_vec(u);
        if let Some(g) = source {
            for ((yi, gi), mi) in y.iter_mut().zip(g).zip(&self.mass) {
                *yi += self.dt * mi * gi;
            }
        }
        self.implicit.solve_in_place(&mut y);
        y
    }

    /// `w <- S* w` with `S* = M^-1 C^T B^-T M`, the `M`-adjoint of the homogeneous step.
    pub fn adjoint_step(&self, w: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = w.iter().zip(&self.mass).map(|(a, m)| a * m).collect();
        // B is symmetric, so B^-T = B^-1
        self.implicit.solve_in_place(&mut y);
        let mut z = self.explicit_t.mul_vec(&y);
        z.iter_mut().zip(&self.mass).for_each(|(v, m)| *v /= m);
        z
    }

    /// `Q* w = M^-1 (B^-1 M)^T M w = B^-T M w`, the `M`-adjoint of the source map `Q = B^-1 M`.
    pub fn source_adjoint(&self, w: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = w.iter().zip(&self.mass).map(|(a, m)| a * m).collect();
        self.implicit.solve_in_place(&mut y);
        y
    }
}

fn transpose(a: &CsrMatrix) -> CsrMatrix {
    let mut trip = Vec::with_capacity(a.nnz());
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            trip.push((c, i, v));
        }
    }
    CsrMatrix::from_triplets(a.ncols(), a.nrows(), &trip)
}

/// Which states a march keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Record {
    /// Norms only, plus the final state.
    NormsOnly,
    /// Every `stride`-th state, always including both ends.
    Every(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub values: Vec<f64>,
}

/// States and `M`-norms on the time grid, ordered by increasing time for both
/// forward and adjoint marches.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// `u(T)` for a forward march, `w(0)` for an adjoint one.
    pub end_state: Vec<f64>,
}

impl Trajectory {
    pub fn snapshot_at(&self, step: usize) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.step == step)
    }
}

fn keep(record: Record, n: usize, steps: usize) -> bool {
    match record {
        Record::NormsOnly => false,
        Record::Every(stride) => n == 0 || n == steps || (stride > 0 && n.is_multiple_of(stride)),
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), PdeError> {
    if expected != got {
        return Err(PdeError::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn m_norm(mass: &[f64], v: &[f64]) -> f64 {
    linalg::weighted_dot(mass, v, v).max(0.0).sqrt()
}

/// Marches `u_0` forward over `grid`. `sources[n - 1]` is the nodal source of step `n`.
pub fn solve_forward(
    prop: &Propagator,
    u0: &[f64],
    sources: Option<&[Vec<f64>]>,
    grid: TimeGrid,
    record: Record,
) -> Result<Trajectory, PdeError> {
    check_time(prop, grid)?;
    check_len(prop.len(), u0.len())?;
    if let Some(s) = sources {
        check_len(grid.steps, s.len())?;
        for g in s {
            check_len(prop.len(), g.len())?;
        }
    }
    let mut u = u0.to_vec();
    let mut times = vec![0.0];
    let mut norms = vec![m_norm(&prop.mass, &u)];
    let mut snapshots = Vec::new();
    if keep(record, 0, grid.steps) {
        snapshots.push(Snapshot { step: 0, time: 0.0, values: u.clone() });
    }
    for n in 1..=grid.steps {
        u = prop.step(&u, sources.map(|s| s[n - 1].as_slice()));
        times.push(grid.time(n));
        norms.push(m_norm(&prop.mass, &u));
        if keep(record, n, grid.steps) {
            snapshots.push(Snapshot { step: n, time: grid.time(n), values: u.clone() });
        }
    }
    if let Some(bad) = u.iter().position(|v| !v.is_finite()) {
        return Err(PdeError::NonFinite { index: bad });
    }
    Ok(Trajectory { times, norms, snapshots, end_state: u })
}

/// Marches terminal data `w_T` backward with the adjoint step.
pub fn solve_adjoint(prop: &Propagator, w_t: &[f64], grid: TimeGrid, record: Record) -> Result<Trajectory, PdeError> {
    check_time(prop, grid)?;
    check_len(prop.len(), w_t.len())?;
    let steps = grid.steps;
    let mut w = w_t.to_vec();
    let mut norms = vec![0.0; steps + 1];
    norms[steps] = m_norm(&prop.mass, &w);
    let mut snapshots = Vec::new();
    if keep(record, steps, steps) {
        snapshots.push(Snapshot { step: steps, time: grid.time(steps), values: w.clone() });
    }
    for n in (0..steps).rev() {
        w = prop.adjoint_step(&w);
        norms[n] = m_norm(&prop.mass, &w);
        if keep(record, n, steps) {
            snapshots.push(Snapshot { step: n, time: grid.time(n), values: w.clone() });
        }
    }
    snapshots.reverse();
    if let Some(bad) = w.iter().position(|v| !v.is_finite()) {
        return Err(PdeError::NonFinite { index: bad });
    }
    Ok(Trajectory { times: (0..=steps).map(|n| grid.time(n)).collect(), norms, snapshots, end_state: w })
}

fn check_time(prop: &Propagator, grid: TimeGrid) -> Result<(), PdeError> {
    if (grid.dt() - prop.dt).abs() > 1e-12 * prop.dt {
        return Err(PdeError::InvalidTimeStep(format!("time grid step {} differs from the propagator step {}", grid.dt(), prop.dt)));
    }
    Ok(())
}
