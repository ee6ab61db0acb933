use linalg::{smallest_generalized_eigen, GeneralizedOptions};

use crate::stepping::{Propagator, Scheme, Trajectory};
use crate::PdeError;

/// Relative slack allowed between consecutive weighted energies.
pub const MONOTONE_SLACK: f64 = 1e-8;

/// Growth rate of the backward march derived from the discrete spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    /// Smallest eigenvalue of `A v = nu M v`.
    pub nu_min: f64,
    /// Continuous rate `max(0, -nu_min)`.
    pub c_continuous: f64,
    /// Smallest `c` with `||S||_M <= e^{c dt}`.
    pub c: f64,
}

/// Smallest `c` such that one step multiplies the `M`-norm by at most `e^{c dt}`.
pub fn rate_from_spectrum(scheme: Scheme, dt: f64, nu_min: f64) -> f64 {
    if nu_min >= 0.0 {
        return 0.0;
    }
    scheme.amplification(nu_min, dt).abs().ln().max(0.0) / dt
}

pub fn effective_rate(prop: &Propagator) -> Result<RateEstimate, PdeError> {
    let eig = smallest_generalized_eigen(prop.operator(), prop.mass(), GeneralizedOptions::default())
        .map_err(|e| PdeError::Solver { context: "smallest eigenvalue of the generator".into(), source: e })?;
    let nu = eig.eigenvalue;
    Ok(RateEstimate { nu_min: nu, c_continuous: (-nu).max(0.0), c: rate_from_spectrum(prop.scheme(), prop.dt(), nu) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub c: f64,
    /// Whether `e^{2 c t_j} ||w_j||^2` is nondecreasing within the slack.
    pub monotone: bool,
    /// Largest `e^{2 c t_j} ||w_j||^2 / (e^{2 c t_{j+1}} ||w_{j+1}||^2)`.
    pub worst_ratio: f64,
    pub worst_index: Option<usize>,
    /// Trapezoid value of the integral of `||w||^2` over `(T/4, 3T/4)`.
    pub integral: f64,
    /// `(T/2) e^{-3Tc/2} ||w(0)||^2`.
    pub integral_bound: f64,
    pub integral_ok: bool,
}

impl EnergyReport {
    pub fn pass(&self) -> bool {
        self.monotone && self.integral_ok
    }
}

pub fn energy_monotonicity_check(traj: &Trajectory, c: f64) -> Result<EnergyReport, PdeError> {
    let n = traj.times.len();
    if n < 2 || traj.norms.len() != n {
        return Err(PdeError::InvalidParameter("trajectory needs at least two time levels with norms".into()));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(PdeError::InvalidParameter(format!("rate c must be finite and nonnegative, got {c}")));
    }
    let mut worst_ln = f64::NEG_INFINITY;
    let mut worst_index = None;
    for j in 0..n - 1 {
        let (a, b) = (traj.norms[j], traj.norms[j + 1]);
        let ln_ratio = if a == 0.0 {
            f64::NEG_INFINITY
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            2.0 * c * (traj.times[j] - traj.times[j + 1]) + 2.0 * (a / b).ln()
        };
        if ln_ratio > worst_ln {
            worst_ln = ln_ratio;
            worst_index = Some(j);
        }
    }
    let monotone = worst_ln <= MONOTONE_SLACK.ln_1p();
    let horizon = traj.times[n - 1] - traj.times[0];
    let t0 = traj.times[0];
    let sq: Vec<f64> = traj.norms.iter().map(|v| v * v).collect();
    let integral = trapezoid_window(&traj.times, &sq, t0 + 0.25 * horizon, t0 + 0.75 * horizon);
    let integral_bound = 0.5 * horizon * (-1.5 * horizon * c).exp() * sq[0];
    Ok(EnergyReport {
        c,
        monotone,
        worst_ratio: worst_ln.exp(),
        worst_index,
        integral,
        integral_bound,
        integral_ok: integral >= integral_bound,
    })
}

/// Trapezoid rule for piecewise-linear data on `[a, b]`, interpolating at the ends.
pub fn trapezoid_window(t: &[f64], f: &[f64], a: f64, b: f64) -> f64 {
    let interp = |x: f64, i: usize| f[i] + (f[i + 1] - f[i]) * (x - t[i]) / (t[i + 1] - t[i]);
    let mut total = 0.0;
    for i in 0..t.len().saturating_sub(1) {
        let lo = t[i].max(a);
        let hi = t[i + 1].min(b);
        if hi > lo {
            total += 0.5 * (hi - lo) * (interp(lo, i) + interp(hi, i));
        }
    }
    total
}
