use geometry::SubsetShape;
use pde::{Discretization, Scheme};
use rayon::prelude::*;

use crate::hum::{hum_control, HumOptions};
use crate::observability::observability_constant;
use crate::problem::ControlProblem;
use crate::ControlError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanParameter {
    Mu,
    Horizon,
}

impl ScanParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanParameter::Mu => "mu",
            ScanParameter::Horizon => "T",
        }
    }
}

/// Fixed data of a scan; the scanned parameter overrides `mu` or `horizon`.
#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub mu: f64,
    pub horizon: f64,
    pub dt_max: f64,
    pub scheme: Scheme,
    pub omega: SubsetShape,
    pub hum: HumOptions,
    /// Initial state at the unknowns.
    pub initial: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanValues {
    pub observability: f64,
    pub terminal_norm: f64,
    pub free_terminal_norm: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub value: f64,
    /// Error message when the run failed; the scan carries on.
    pub outcome: Result<ScanValues, String>,
}

fn run(disc: &Discretization, cfg: &ScanConfig, parameter: ScanParameter, value: f64) -> Result<ScanValues, ControlError> {
    let (mu, horizon) = match parameter {
        ScanParameter::Mu => (value, cfg.horizon),
        ScanParameter::Horizon => (cfg.mu, value),
    };
    let problem = ControlProblem::new(disc, mu, cfg.scheme, horizon, cfg.dt_max, &cfg.omega)?;
    let obs = observability_constant(&problem)?;
    let hum = hum_control(&problem, &cfg.initial, cfg.hum)?;
    Ok(ScanValues {
        observability: obs.constant,
        terminal_norm: hum.terminal_norm,
        free_terminal_norm: hum.free_terminal_norm,
        iterations: hum.iterations,
    })
}

/// One row per value, in input order; values run concurrently.
pub fn cost_scan(disc: &Discretization, cfg: &ScanConfig, parameter: ScanParameter, values: &[f64]) -> Vec<ScanRow> {
    values.par_iter().map(|&value| ScanRow { value, outcome: run(disc, cfg, parameter, value).map_err(|e| e.to_string()) }).collect()
}
