use linalg::{smallest_generalized_eigen, GeneralizedOptions};

use crate::assembly::{assemble, critical_mu, Discretization};
use crate::mesh::Mesh;
use crate::stepping::{Propagator, Scheme, TimeGrid};
use crate::PdeError;

/// Ratio below which successive refinements count as converged.
pub const STABLE_RATIO: f64 = 1.05;
/// Ratio every refinement must exceed for a blow-up trend.
pub const BLOWUP_RATIO: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dichotomy {
    Stable,
    BlowUpTrend,
    Inconclusive,
}

impl Dichotomy {
    pub fn as_str(self) -> &'static str {
        match self {
            Dichotomy::Stable => "stable",
            Dichotomy::BlowUpTrend => "blow-up trend",
            Dichotomy::Inconclusive => "inconclusive",
        }
    }
}

/// Refinement study on `(0, length)` started from the bump `16 (x (a - x) / a^2)^2` on `(0, a)`, peak 1 at `a / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowupConfig {
    pub length: f64,
    /// Cell counts per level, increasing.
    pub levels: Vec<usize>,
    pub t_probe: f64,
    /// Time steps are `min(h, dt_max)`, shrunk to divide `t_probe`.
    pub dt_max: f64,
    pub scheme: Scheme,
    pub bump_width: f64,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        Self {
            length: 1.0,
            levels: vec![6400, 12800, 25600, 51200],
            t_probe: 0.05,
            dt_max: 2e-5,
            scheme: Scheme::ImplicitEuler,
            bump_width: 0.25,
        }
    }
}

impl BlowupConfig {
    pub fn bump(&self, x: f64) -> f64 {
        let a = self.bump_width;
        if x > 0.0 && x < a {
            let s = x * (a - x) / (a * a);
            16.0 * s * s
        } else {
            0.0
        }
    }
}

/// How `ln ||u(t_probe)||` was obtained at a level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelMethod {
    /// Time march with the configured scheme.
    TimeMarch,
    /// Lower bound `-nu_1 t + ln |<u_0, v_1>_M|` from the ground state of the semi-discrete
    /// generator, used when its growth rate exceeds what one implicit step can represent.
    DominantMode,
}

impl LevelMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            LevelMethod::TimeMarch => "time_march",
            LevelMethod::DominantMode => "dominant_mode",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupLevel {
    pub cells: usize,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub initial_norm: f64,
    /// `ln ||u(t_probe)||`, accumulated with renormalization.
    pub ln_norm: f64,
    /// `ln` of `||u(t_probe)||` divided by its value at the previous level.
    pub ln_ratio: Option<f64>,
    pub method: LevelMethod,
    /// Ground-state eigenvalue of `A v = nu M v`, computed for dominant-mode levels.
    pub nu_min: Option<f64>,
}

impl BlowupLevel {
    pub fn norm(&self) -> f64 {
        self.ln_norm.exp()
    }

    pub fn ratio(&self) -> Option<f64> {
        self.ln_ratio.map(f64::exp)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupReport {
    pub mu: f64,
    pub critical_mu: f64,
    pub t_probe: f64,
    pub levels: Vec<BlowupLevel>,
    pub classification: Dichotomy,
    /// Set when `mu` equals the critical value, where the nodal space cannot see the enlarged energy space.
    pub formal: bool,
}

pub fn classify(ln_ratios: &[f64]) -> Dichotomy {
    if ln_ratios.is_empty() {
        return Dichotomy::Inconclusive;
    }
    if ln_ratios.iter().all(|&r| r <= STABLE_RATIO.ln()) {
        Dichotomy::Stable
    } else if ln_ratios.iter().all(|&r| r >= BLOWUP_RATIO.ln()) {
        Dichotomy::BlowUpTrend
    } else {
        Dichotomy::Inconclusive
    }
}

/// Runs one level and returns `ln ||u(t_probe)||`, renormalizing whenever the norm leaves `[1e-100, 1e100]`.
fn run_level(mu: f64, cfg: &BlowupConfig, cells: usize) -> Result<BlowupLevel, PdeError> {
    let disc = Discretization::new(Mesh::interval(cfg.length, cells)?)?;
    let h = disc.h();
    let grid = TimeGrid::with_max_step(cfg.t_probe, h.min(cfg.dt_max))?;
    let mut u = disc.mesh().interpolate(|x| cfg.bump(x[0]));
    let initial_norm = disc.norm(&u);
    let prop = match Propagator::new(&disc, mu, cfg.scheme, grid.dt()) {
        Ok(p) => p,
        Err(PdeError::NotDefinite { .. }) => {
            let a = assemble(mu, &disc, 0.0);
            let eig = smallest_generalized_eigen(&a, disc.mass(), GeneralizedOptions::default())
                .map_err(|e| PdeError::Solver { context: "ground state for the dominant-mode bound".into(), source: e })?;
            let c1 = disc.inner(&u, &eig.vector).abs();
            return Ok(BlowupLevel {
                cells,
                h,
                dt: grid.dt(),
                steps: 0,
                initial_norm,
                ln_norm: -eig.eigenvalue * cfg.t_probe + c1.ln(),
                ln_ratio: None,
                method: LevelMethod::DominantMode,
                nu_min: Some(eig.eigenvalue),
            });
        }
        Err(e) => return Err(e),
    };
    let mut ln_scale = 0.0;
    for _ in 0..grid.steps {
        u = prop.step(&u, None);
        let n = disc.norm(&u);
        if !n.is_finite() {
            return Err(PdeError::NonFinite { index: u.iter().position(|v| !v.is_finite()).unwrap_or(0) });
        }
        if !(1e-100..=1e100).contains(&n) && n > 0.0 {
            ln_scale += n.ln();
            u.iter_mut().for_each(|v| *v /= n);
        }
    }
    let ln_norm = ln_scale + disc.norm(&u).ln();
    Ok(BlowupLevel {
        cells,
        h,
        dt: grid.dt(),
        steps: grid.steps,
        initial_norm,
        ln_norm,
        ln_ratio: None,
        method: LevelMethod::TimeMarch,
        nu_min: None,
    })
}

/// Marches the bump to `t_probe` at each level and classifies the growth of the norm under refinement.
/// One-dimensional: the singularity is the endpoint `x = 0`.
pub fn blowup_experiment(mu: f64, cfg: &BlowupConfig) -> Result<BlowupReport, PdeError> {
    if cfg.levels.len() < 2 || cfg.levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PdeError::InvalidParameter("need at least two strictly increasing refinement levels".into()));
    }
    if !(cfg.t_probe > 0.0 && cfg.bump_width > 0.0 && cfg.bump_width <= cfg.length) {
        return Err(PdeError::InvalidParameter(format!(
            "need t_probe > 0 and 0 < bump width <= length, got {} and {}",
            cfg.t_probe, cfg.bump_width
        )));
    }
    let mut levels = Vec::with_capacity(cfg.levels.len());
    for &cells in &cfg.levels {
        let mut level = run_level(mu, cfg, cells)?;
        if let Some(prev) = levels.last() {
            let prev: &BlowupLevel = prev;
            level.ln_ratio = Some(level.ln_norm - prev.ln_norm);
        }
        levels.push(level);
    }
    let ratios: Vec<f64> = levels.iter().filter_map(|l| l.ln_ratio).collect();
    let critical = critical_mu(1);
    Ok(BlowupReport {
        mu,
        critical_mu: critical,
        t_probe: cfg.t_probe,
        classification: classify(&ratios),
        formal: (mu - critical).abs() <= 1e-12,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_rules() {
        assert_eq!(classify(&[0.01, -0.2, 0.0]), Dichotomy::Stable);
        assert_eq!(classify(&[3.0, 10.0, 50.0]), Dichotomy::BlowUpTrend);
        assert_eq!(classify(&[0.01, 3.0]), Dichotomy::Inconclusive);
        assert_eq!(classify(&[(1.2f64).ln()]), Dichotomy::Inconclusive);
        assert_eq!(classify(&[]), Dichotomy::Inconclusive);
    }

    #[test]
    fn bump_is_normalized_and_supported_near_zero() {
        let cfg = BlowupConfig::default();
        assert_eq!(cfg.bump(0.0), 0.0);
        assert_eq!(cfg.bump(0.3), 0.0);
        assert!((cfg.bump(0.125) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coarse_heat_equation_is_stable() {
        let cfg = BlowupConfig { levels: vec![200, 400, 800], dt_max: 1e-4, ..BlowupConfig::default() };
        let r = blowup_experiment(0.0, &cfg).unwrap();
        assert_eq!(r.classification, Dichotomy::Stable);
        assert!(!r.formal);
    }

    #[test]
    fn rejects_bad_levels() {
        let cfg = BlowupConfig { levels: vec![400, 200], ..BlowupConfig::default() };
        assert!(blowup_experiment(0.0, &cfg).is_err());
    }
}
