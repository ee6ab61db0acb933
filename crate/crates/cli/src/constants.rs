//! Effective weight constants and the `lambda_0` search shared by every command.

use carleman_audit::{AuditError, AuditOptions, AuditReport, Auditor, LambdaTrial};
use geometry::{DomainGeometry, Regions};
use weights::{build_psi, CLambda, RecipeChoice, WeightConfig, WeightParams, WeightsError};

use crate::output::num;
use crate::scenario::Scenario;

#[derive(Debug)]
pub struct LambdaSearch {
    pub lambda0: Option<f64>,
    /// Report at `lambda_0`, or at the last grid value when the grid is exhausted.
    pub report: AuditReport,
    pub trials: Vec<LambdaTrial>,
    /// `ln C_lambda` at the reported `lambda`.
    pub ln_c_lambda: f64,
}

#[derive(Debug)]
pub struct WeightSetup {
    /// Configuration at the smallest grid value.
    pub base: WeightConfig,
    pub tangency: f64,
    pub growth: f64,
    pub c3: f64,
    pub c3_overridden: bool,
    pub c_lambda_overridden: bool,
    pub search: LambdaSearch,
}

#[derive(Debug, thiserror::Error)]
pub enum SetupError {
    #[error(transparent)]
    Weights(#[from] WeightsError),
    #[error(transparent)]
    Audit(#[from] AuditError),
}

pub fn audit_options(scenario: &Scenario, strict: bool) -> AuditOptions {
    let defaults = AuditOptions::default();
    let mut o = AuditOptions {
        required_relative: scenario.audit.required_margin,
        seed: scenario.seed.unwrap_or(defaults.seed),
        counts: scenario.audit.counts(),
        directions: scenario.audit.directions,
    };
    if strict {
        o.required_relative = o.required_relative.max(defaults.strict().required_relative);
    }
    o
}

fn sorted_grid(grid: &[f64]) -> Vec<f64> {
    let mut g = grid.to_vec();
    g.sort_by(|a, b| a.total_cmp(b));
    g.dedup();
    g
}

impl WeightSetup {
    pub fn build(scenario: &Scenario, geometry: &DomainGeometry, regions: &Regions, strict: bool) -> Result<Self, SetupError> {
        let mut kit = build_psi(geometry, regions)?;
        if let Some(d) = scenario.overrides.delta {
            kit = kit.with_delta(d)?;
        }
        let grid = sorted_grid(&scenario.lambda_grid);
        let c3 = scenario.c3();
        let params =
            |lambda| WeightParams { lambda, s: scenario.s, gamma: scenario.gamma, horizon: scenario.horizon, c3, mu: scenario.design_mu() };
        let recipe = WeightConfig::from_recipes(geometry, kit.clone(), params(grid[0]), scenario.overrides.r0)?;
        let opts = audit_options(scenario, strict);
        let search = match scenario.overrides.c_lambda {
            None => {
                let auditor = Auditor::new(geometry, regions, recipe.clone(), opts)?;
                match auditor.find_lambda0(&grid) {
                    Ok(found) => {
                        let ln = auditor.weights_at(found.lambda0)?.c_lambda().ln_value;
                        LambdaSearch { lambda0: Some(found.lambda0), report: found.report, trials: found.trials, ln_c_lambda: ln }
                    }
                    Err(AuditError::Exhausted { report, .. }) => {
                        let ln = auditor.weights_at(report.lambda)?.c_lambda().ln_value;
                        let trials = exhausted_trials(&auditor, &grid)?;
                        LambdaSearch { lambda0: None, report: *report, trials, ln_c_lambda: ln }
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            // A fixed C_lambda holds at every grid value, so each value gets its own base configuration.
            Some(c) => {
                let fixed = CLambda { ln_value: c.ln() };
                let mut trials = Vec::new();
                let mut last = None;
                for &l in &grid {
                    let w = WeightConfig::new(kit.clone(), params(l), recipe.r0(), fixed)?;
                    let report = Auditor::new(geometry, regions, w, opts)?.audit(l)?;
                    trials.push(LambdaTrial { lambda: l, pass: report.pass, failing: report.failing().map(|r| r.check).collect() });
                    let pass = report.pass;
                    last = Some(report);
                    if pass {
                        break;
                    }
                }
                let report = last.expect("grid is not empty");
                LambdaSearch { lambda0: report.pass.then_some(report.lambda), report, trials, ln_c_lambda: fixed.ln_value }
            }
        };
        let base = match scenario.overrides.c_lambda {
            Some(c) => WeightConfig::new(kit, params(grid[0]), recipe.r0(), CLambda { ln_value: c.ln() })?,
            None => recipe,
        };
        Ok(Self {
            base,
            tangency: geometry.tangency_constant(),
            growth: geometry.projection_growth_constant(),
            c3,
            c3_overridden: scenario.overrides.c3.is_some(),
            c_lambda_overridden: scenario.overrides.c_lambda.is_some(),
            search,
        })
    }

    pub fn delta_choice(&self) -> &RecipeChoice {
        self.base.kit().delta_choice()
    }

    /// Header lines naming each constant and the recipe clause that bound it.
    pub fn header_lines(&self) -> Vec<String> {
        let kit = self.base.kit();
        let dc = kit.delta_choice();
        let delta = if kit.delta_overridden() {
            format!("delta = {} (override; recipe {} from clause {})", num(kit.delta()), num(dc.value), dc.binding_label())
        } else {
            format!("delta = {} (clause {})", num(kit.delta()), dc.binding_label())
        };
        let r0 = match self.base.r0_choice() {
            Some(c) if c.value == self.base.r0() => format!("r0 = {} (clause {})", num(self.base.r0()), c.binding_label()),
            Some(c) => format!("r0 = {} (override; recipe {} from clause {})", num(self.base.r0()), num(c.value), c.binding_label()),
            None => format!("r0 = {}", num(self.base.r0())),
        };
        let s = &self.search;
        let c_lambda = format!(
            "C_lambda = {} (ln {}, lambda = {}, {})",
            num(s.ln_c_lambda.exp()),
            num(s.ln_c_lambda),
            num(s.report.lambda),
            if self.c_lambda_overridden { "override" } else { "sampled sup" }
        );
        let lambda0 = match s.lambda0 {
            Some(l) => format!("lambda0 = {} (smallest passing grid value)", num(l)),
            None => format!(
                "lambda0 = none (grid exhausted; failing at lambda = {}: {})",
                num(s.report.lambda),
                s.report.failing().map(|r| r.check.as_str()).collect::<Vec<_>>().join(" ")
            ),
        };
        vec![
            delta,
            format!("delta0 = {} (gradient floor of psi_1 off omega_0)", num(kit.delta0())),
            r0,
            c_lambda,
            format!("C_Omega = {} (sampled tangency sup)", num(self.tangency)),
            format!("E_Omega = {} (sampled projection growth sup)", num(self.growth)),
            format!("D_Omega_psi1 = {} (sampled projection defect sup)", num(kit.d_omega())),
            format!("C3 = {} ({})", num(self.c3), if self.c3_overridden { "override" } else { "default" }),
            lambda0,
        ]
    }
}

/// Trial rows when every grid value fails: re-audit each value for its failing list.
fn exhausted_trials(auditor: &Auditor, grid: &[f64]) -> Result<Vec<LambdaTrial>, AuditError> {
    grid.iter()
        .map(|&l| {
            let r = auditor.audit(l)?;
            Ok(LambdaTrial { lambda: l, pass: r.pass, failing: r.failing().map(|c| c.check).collect() })
        })
        .collect()
}
