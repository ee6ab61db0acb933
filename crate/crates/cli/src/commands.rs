//! Subcommands. Each writes its CSVs into the output directory and returns summary rows.

use std::path::PathBuf;

use control::{cost_scan, hum_control, ControlProblem, HumOptions, ScanConfig, ScanParameter};
use geometry::{DomainGeometry, Regions, Shape};
use hardy::{
    appendix_phi_check, check_inequality, estimate_c0_gamma, gaussian_field, hardy_study, sweep_c2_c3, Bisection, HardyCase, HardyReport,
    Inequality, InequalityContext, InequalityReport, LevelSpec, PhiCheckOptions, Placement,
};
use linalg::CgOptions;
use pde::{
    blowup_experiment, critical_mu, effective_rate, energy_monotonicity_check, solve_adjoint, BlowupConfig, Dichotomy, Discretization,
    Mesh, Propagator, Record, Scheme, TimeGrid,
};
use rayon::prelude::*;

use crate::constants::WeightSetup;
use crate::output::{num, opt_num, point, Table};
use crate::scenario::{PolarMesh, Scenario};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    AuditWeights,
    Hardy,
    Simulate,
    Control,
    Observability,
    Report,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::AuditWeights => "audit-weights",
            Command::Hardy => "hardy",
            Command::Simulate => "simulate",
            Command::Control => "control",
            Command::Observability => "observability",
            Command::Report => "report",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub command: &'static str,
    pub check: String,
    pub value: String,
    pub pass: bool,
}

fn row(command: Command, check: impl Into<String>, value: impl Into<String>, pass: bool) -> SummaryRow {
    SummaryRow { command: command.as_str(), check: check.into(), value: value.into(), pass }
}

/// A validated scenario with its geometry, output directory and weight constants.
pub struct Context {
    pub scenario: Scenario,
    pub geometry: DomainGeometry,
    pub regions: Regions,
    pub out: PathBuf,
    pub strict: bool,
    pub weights: Result<WeightSetup, String>,
}

impl Context {
    pub fn new(scenario: Scenario, out: PathBuf, strict: bool) -> Result<Self, CliError> {
        let geometry = scenario.geometry()?;
        let regions = scenario.regions(&geometry)?;
        std::fs::create_dir_all(&out).map_err(|e| CliError::Output(format!("cannot create {}: {e}", out.display())))?;
        let weights = WeightSetup::build(&scenario, &geometry, &regions, strict).map_err(|e| e.to_string());
        Ok(Self { scenario, geometry, regions, out, strict, weights })
    }

    pub fn header(&self, command: Command) -> Vec<String> {
        let mut echo = self.scenario.clone();
        echo.output = None;
        let mut lines = vec![
            format!("scenario = {}", self.scenario.name),
            format!("command = {}", command.as_str()),
            format!("seed = {}", self.scenario.seed.map(|s| s.to_string()).unwrap_or_else(|| "default".into())),
            format!("strict = {}", self.strict),
        ];
        match &self.weights {
            Ok(w) => lines.extend(w.header_lines()),
            Err(e) => lines.push(format!("weights = unavailable ({e})")),
        }
        lines.push(format!("config = {}", echo.to_json()));
        lines
    }

    fn emit(&self, command: Command, file: &str, table: &Table) -> Result<(), CliError> {
        table.write(&self.out.join(file), &self.header(command))
    }

    pub fn output(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }

    fn seed(&self) -> u64 {
        self.scenario.seed.unwrap_or(0)
    }
}

fn module(e: impl std::fmt::Display) -> CliError {
    CliError::Module(e.to_string())
}

pub fn run_command(ctx: &Context, command: Command) -> Result<Vec<SummaryRow>, CliError> {
    match command {
        Command::AuditWeights => audit_weights(ctx),
        Command::Hardy => hardy(ctx),
        Command::Simulate => simulate(ctx),
        Command::Control => control(ctx),
        Command::Observability => observability(ctx),
        Command::Report => {
            let mut rows = Vec::new();
            for c in [Command::AuditWeights, Command::Hardy, Command::Simulate, Command::Control, Command::Observability] {
                match run_command(ctx, c) {
                    Ok(r) => rows.extend(r),
                    Err(CliError::Module(m)) => rows.push(row(c, "module_error", m, false)),
                    Err(e) => return Err(e),
                }
            }
            Ok(rows)
        }
    }
}

pub fn write_summary(ctx: &Context, command: Command, rows: &[SummaryRow]) -> Result<(), CliError> {
    let mut t = Table::new(&["command", "check", "value", "pass"]);
    for r in rows {
        t.push(vec![r.command.to_string(), r.check.clone(), r.value.clone(), r.pass.to_string()]);
    }
    ctx.emit(command, "summary.csv", &t)
}

fn audit_weights(ctx: &Context) -> Result<Vec<SummaryRow>, CliError> {
    let c = Command::AuditWeights;
    let w = ctx.weights.as_ref().map_err(module)?;
    let s = &w.search;
    let mut t = Table::new(&["check_id", "region", "lambda", "n_samples", "min_margin", "min_relative", "violations", "worst_x"]);
    for r in &s.report.records {
        t.push(vec![
            r.check.as_str().into(),
            r.region.label().into(),
            opt_num(r.lambda),
            r.samples.to_string(),
            r.min_margin.to_string(),
            num(r.min_relative),
            r.violations.to_string(),
            point(&r.worst_x),
        ]);
    }
    ctx.emit(c, "audit.csv", &t)?;
    let mut t = Table::new(&["lambda", "pass", "failing"]);
    for tr in &s.trials {
        t.push(vec![num(tr.lambda), tr.pass.to_string(), tr.failing.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(" ")]);
    }
    ctx.emit(c, "lambda_search.csv", &t)?;
    let violations: usize = s.report.records.iter().map(|r| r.violations).sum();
    let mut rows = vec![
        row(c, "lambda0", s.lambda0.map(num).unwrap_or_else(|| "none".into()), s.lambda0.is_some()),
        row(c, "samples", s.report.sample_count.to_string(), s.report.sample_count > 0),
        row(c, "violations", violations.to_string(), violations == 0),
    ];
    for r in s.report.failing() {
        rows.push(row(c, format!("failing:{}", r.check.as_str()), r.min_margin.to_string(), false));
    }
    Ok(rows)
}

fn interval_disc(length: f64, cells: usize) -> Result<Discretization, CliError> {
    Discretization::new(Mesh::interval(length, cells).map_err(module)?).map_err(module)
}

fn hardy_rows(t: &mut Table, label: &str, r: &HardyReport) {
    for l in &r.levels {
        t.push(vec![label.into(), r.case.dim.to_string(), num(r.weight_exponent), num(l.h), num(l.constant), num(l.residual)]);
    }
}

fn inequality_row(t: &mut Table, r: &InequalityReport) {
    let constants = match r.inequality {
        Inequality::GammaHardy { c1 } => format!("c1={}", num(c1)),
        Inequality::WeightedCoercivity { c2, c3 } => format!("c2={} c3={}", num(c2), num(c3)),
        Inequality::NormEquivalence { c0 } => format!("c0={}", num(c0)),
    };
    t.push(vec![
        r.id.into(),
        num(r.gamma),
        num(r.mu),
        constants,
        r.fields.to_string(),
        r.violations.to_string(),
        num(r.worst_margin),
        r.worst_seed.map(|s| s.to_string()).unwrap_or_default(),
        r.worst_chain.unwrap_or("").into(),
    ]);
}

fn hardy(ctx: &Context) -> Result<Vec<SummaryRow>, CliError> {
    let c = Command::Hardy;
    let h = &ctx.scenario.hardy;
    let gamma = ctx.scenario.gamma;
    let mut rows = Vec::new();
    let mut flags = Vec::new();
    let mut table = Table::new(&["case", "N", "gamma", "h", "constant", "residual"]);

    if !h.interval_levels.is_empty() {
        let levels: Vec<LevelSpec> = h.interval_levels.iter().map(|&cells| LevelSpec::Interval { cells }).collect();
        let r = hardy_study(HardyCase { placement: Placement::Boundary, dim: 1, size: h.size }, &levels, 2.0, 0.0).map_err(module)?;
        hardy_rows(&mut table, "boundary_1d", &r);
        let finest = r.finest().expect("levels are not empty");
        rows.push(row(c, "boundary_1d_finest", num(finest.constant), (0.25..=0.40).contains(&finest.constant)));
        let decreasing = r.levels.windows(2).all(|w| w[1].constant < w[0].constant);
        rows.push(row(c, "boundary_1d_decreasing", decreasing.to_string(), decreasing));
        if let Some(fit) = r.fit {
            rows.push(row(c, "boundary_1d_fit_slope", num(fit.slope), true));
        }
        flags.extend(r.flags.iter().map(|f| format!("boundary_1d:{f}")));
    }
    if h.two_dimensional {
        let level = [LevelSpec::Polar(h.polar.into())];
        let study = |placement| hardy_study(HardyCase { placement, dim: 2, size: h.size }, &level, 2.0, 0.0);
        let (b, i) = rayon::join(|| study(Placement::Boundary), || study(Placement::Interior));
        let (b, i) = (b.map_err(module)?, i.map_err(module)?);
        hardy_rows(&mut table, "boundary_2d", &b);
        hardy_rows(&mut table, "interior_2d", &i);
        let (mb, mi) = (b.finest().expect("one level"), i.finest().expect("one level"));
        let gap = mb.constant - mi.constant;
        table.push(vec!["gap".into(), "2".into(), num(2.0), num(mb.h.max(mi.h)), num(gap), num(mb.residual.max(mi.residual))]);
        rows.push(row(c, "boundary_2d", num(mb.constant), mb.constant > 0.5));
        rows.push(row(c, "interior_2d", num(mi.constant), mi.constant < 0.15));
        rows.push(row(c, "gap_2d", num(gap), gap >= 0.35));
        flags.extend(b.flags.iter().map(|f| format!("boundary_2d:{f}")));
        flags.extend(i.flags.iter().map(|f| format!("interior_2d:{f}")));
    }

    let shift_mu = h.shift_mu.unwrap_or(critical_mu(1));
    let shifts: Vec<_> = h
        .shift_levels
        .par_iter()
        .map(|&cells| -> Result<_, CliError> {
            let disc = interval_disc(h.size, cells)?;
            let e = estimate_c0_gamma(&disc, gamma, shift_mu, Bisection::default()).map_err(module)?;
            Ok((disc.h(), e))
        })
        .collect::<Result<_, _>>()?;
    for (hh, e) in &shifts {
        table.push(vec!["shift_c0".into(), "1".into(), num(gamma), num(*hh), num(e.c0), num(e.residual)]);
    }
    if let Some((_, e)) = shifts.last() {
        rows.push(row(c, "shift_c0_finest", num(e.c0), e.c0.is_finite()));
    }
    ctx.emit(c, "hardy.csv", &table)?;

    let disc = interval_disc(h.size, h.inequality_cells)?;
    let seed = ctx.seed();
    let c0 = estimate_c0_gamma(&disc, gamma, shift_mu, Bisection::default()).map_err(module)?.c0;
    let design_mu = ctx.scenario.design_mu();
    let sweep = sweep_c2_c3(&disc, gamma, design_mu, &h.c3_grid, Bisection::default()).map_err(module)?;
    let mut st = Table::new(&["gamma", "mu", "c3", "c2"]);
    for r in &sweep.rows {
        st.push(vec![num(gamma), num(design_mu), num(r.c3), opt_num(r.c2)]);
    }
    ctx.emit(c, "coercivity.csv", &st)?;

    let mut jobs = vec![(shift_mu, Inequality::GammaHardy { c1: c0 + 1e-3 }, seed)];
    match sweep.best {
        Some((c3, c2)) => jobs.push((design_mu, Inequality::WeightedCoercivity { c2, c3 }, seed.wrapping_add(1 << 20))),
        None => rows.push(row(c, "weighted_coercivity", "no admissible pair", false)),
    }
    for (k, &mu) in h.norm_mu.iter().enumerate() {
        jobs.push((mu, Inequality::NormEquivalence { c0 }, seed.wrapping_add((k as u64 + 2) << 20)));
    }
    let reports: Vec<InequalityReport> = jobs
        .par_iter()
        .map(|&(mu, ineq, s)| -> Result<_, CliError> {
            let ictx = InequalityContext::new(&disc, gamma, mu).map_err(module)?;
            Ok(check_inequality(&ictx, ineq, h.fields, s))
        })
        .collect::<Result<_, _>>()?;
    let mut it = Table::new(&["id", "gamma", "mu", "constants", "fields", "violations", "worst_margin", "worst_seed", "worst_chain"]);
    for r in &reports {
        inequality_row(&mut it, r);
        rows.push(row(c, format!("{}(mu={})", r.id, num(r.mu)), r.violations.to_string(), r.pass()));
    }
    ctx.emit(c, "inequalities.csv", &it)?;

    let geoms = [DomainGeometry::interval(h.size).map_err(module)?, DomainGeometry::tangent_disk(h.appendix_disk_radius).map_err(module)?];
    let opts = PhiCheckOptions { r1: h.appendix_r1, samples: h.appendix_samples, ..PhiCheckOptions::default() };
    let mut at = Table::new(&["N", "radius", "phi", "laplacian", "margin", "scaled_remainder", "step", "retried"]);
    for g in &geoms {
        let r = appendix_phi_check(g, opts).map_err(module)?;
        for s in &r.samples {
            at.push(vec![
                r.dim.to_string(),
                num(s.radius),
                num(s.phi),
                num(s.laplacian),
                num(s.margin),
                num(s.scaled_remainder),
                num(s.step),
                s.retried.to_string(),
            ]);
        }
        rows.push(row(c, format!("appendix_N{}_failures", r.dim), r.failures.to_string(), r.pass()));
        rows.push(row(c, format!("appendix_N{}_fit", r.dim), num(r.fitted_constant), r.fitted_constant > 0.0));
    }
    ctx.emit(c, "appendix.csv", &at)?;

    for f in flags {
        rows.push(row(c, format!("flag:{f}"), "raised", !ctx.strict));
    }
    Ok(rows)
}

/// Mesh of the scenario geometry: interval cells or a polar disk mesh.
fn scenario_disc(geometry: &DomainGeometry, cells: usize, polar: PolarMesh) -> Result<Discretization, CliError> {
    Discretization::new(Mesh::for_geometry(geometry, cells, polar.into()).map_err(module)?).map_err(module)
}

fn simulate(ctx: &Context) -> Result<Vec<SummaryRow>, CliError> {
    let c = Command::Simulate;
    let sim = &ctx.scenario.simulate;
    let mut rows = Vec::new();
    let cfg = BlowupConfig {
        length: sim.length,
        levels: sim.levels.clone(),
        t_probe: sim.t_probe,
        dt_max: sim.dt_max,
        scheme: sim.scheme.into(),
        bump_width: sim.bump_width,
    };
    let reports: Vec<_> = sim.mu.par_iter().map(|&mu| blowup_experiment(mu, &cfg)).collect::<Result<_, _>>().map_err(module)?;
    let mut t = Table::new(&["mu", "level", "cells", "h", "dt", "norm", "ratio", "method", "classification"]);
    for r in &reports {
        for (k, l) in r.levels.iter().enumerate() {
            t.push(vec![
                num(r.mu),
                k.to_string(),
                l.cells.to_string(),
                num(l.h),
                num(l.dt),
                num(l.norm()),
                opt_num(l.ratio()),
                l.method.as_str().into(),
                r.classification.as_str().into(),
            ]);
        }
        let label = if r.formal { format!("{} (formal)", r.classification.as_str()) } else { r.classification.as_str().into() };
        let pass = !(ctx.strict && r.classification == Dichotomy::Inconclusive);
        rows.push(row(c, format!("dichotomy(mu={})", num(r.mu)), label, pass));
    }
    ctx.emit(c, "dichotomy.csv", &t)?;

    let e = &sim.energy;
    let disc = scenario_disc(&ctx.geometry, e.cells, e.polar)?;
    let grid = TimeGrid::new(e.horizon, e.steps).map_err(module)?;
    let runs: Vec<(f64, Scheme)> = e.mu.iter().flat_map(|&mu| e.schemes.iter().map(move |&s| (mu, Scheme::from(s)))).collect();
    let seed = ctx.seed();
    let results: Vec<_> = runs
        .par_iter()
        .enumerate()
        .map(|(k, &(mu, scheme))| -> Result<_, CliError> {
            let prop = Propagator::new(&disc, mu, scheme, grid.dt()).map_err(module)?;
            let rate = effective_rate(&prop).map_err(module)?;
            let w_t = gaussian_field(disc.len(), seed.wrapping_add(k as u64));
            let record = if k == 0 { Record::Every(e.stride.max(1)) } else { Record::NormsOnly };
            let traj = solve_adjoint(&prop, &w_t, grid, record).map_err(module)?;
            let report = energy_monotonicity_check(&traj, rate.c).map_err(module)?;
            Ok((mu, scheme, rate, report, traj))
        })
        .collect::<Result<_, _>>()?;
    let mut t = Table::new(&["mu", "scheme", "dt", "nu_min", "c", "monotone", "worst_ratio", "integral", "integral_bound", "pass"]);
    for (mu, scheme, rate, r, _) in &results {
        t.push(vec![
            num(*mu),
            scheme.as_str().into(),
            num(grid.dt()),
            num(rate.nu_min),
            num(r.c),
            r.monotone.to_string(),
            num(r.worst_ratio),
            num(r.integral),
            num(r.integral_bound),
            r.pass().to_string(),
        ]);
        rows.push(row(c, format!("energy(mu={},{})", num(*mu), scheme.as_str()), num(r.worst_ratio), r.pass()));
    }
    ctx.emit(c, "energy.csv", &t)?;
    let mut t = Table::new(&["t", "node", "value"]);
    if let Some((.., traj)) = results.first() {
        for s in &traj.snapshots {
            for (i, v) in s.values.iter().enumerate() {
                t.push(vec![num(s.time), i.to_string(), num(*v)]);
            }
        }
    }
    ctx.emit(c, "trajectory.csv", &t)?;
    Ok(rows)
}

/// `sin(pi d(x) / (2 rho))` with `d` the distance to the boundary and `rho` the inradius;
/// on `(0, L)` this is `sin(pi x / L)`.
fn initial_state(geometry: &DomainGeometry, disc: &Discretization) -> Result<Vec<f64>, CliError> {
    let rho = match geometry.shape() {
        Shape::Interval { length } => length / 2.0,
        Shape::TangentDisk { radius } => radius,
        Shape::ParabolaCap { .. } => return Err(module("no control mesh for the parabola cap")),
    };
    Ok(disc.mesh().interpolate(|x| {
        let d = geometry.distance_to_boundary(&nalgebra::DVector::from_column_slice(x)).unwrap_or(0.0).max(0.0);
        (std::f64::consts::PI * d.min(rho) / (2.0 * rho)).sin()
    }))
}

/// The mesh size, capped at `T / 100` so coarse meshes still resolve time.
fn default_step(dt_max: Option<f64>, disc: &Discretization, horizon: f64) -> f64 {
    dt_max.unwrap_or_else(|| disc.h().min(horizon / 100.0))
}

fn control(ctx: &Context) -> Result<Vec<SummaryRow>, CliError> {
    let c = Command::Control;
    let spec = &ctx.scenario.control;
    let disc = scenario_disc(&ctx.geometry, spec.cells, spec.polar)?;
    let u0 = initial_state(&ctx.geometry, &disc)?;
    let omega = ctx.scenario.control_omega();
    let dt_max = default_step(spec.dt_max, &disc, ctx.scenario.horizon);
    let horizon = ctx.scenario.horizon;
    let cg = CgOptions { tol: spec.cg_tol, max_iter: spec.max_iter };
    let seed = ctx.seed();
    let per_mu: Vec<_> = ctx
        .scenario
        .mu
        .par_iter()
        .map(|&mu| -> Result<_, CliError> {
            let p = ControlProblem::new(&disc, mu, spec.scheme.into(), horizon, dt_max, &omega).map_err(module)?;
            let runs = spec
                .epsilons
                .iter()
                .map(|&epsilon| hum_control(&p, &u0, HumOptions { epsilon, cg }).map_err(module))
                .collect::<Result<Vec<_>, _>>()?;
            let mut symmetry: f64 = 0.0;
            for k in 0..spec.symmetry_probes {
                let a = gaussian_field(p.len(), seed.wrapping_add(2 * k as u64));
                let b = gaussian_field(p.len(), seed.wrapping_add(2 * k as u64 + 1));
                let lhs = p.inner(&p.gramian_apply(&a).map_err(module)?, &b);
                let rhs = p.inner(&a, &p.gramian_apply(&b).map_err(module)?);
                symmetry = symmetry.max((lhs - rhs).abs() / (p.norm(&a) * p.norm(&b)));
            }
            Ok((mu, runs, symmetry))
        })
        .collect::<Result<_, _>>()?;
    let mut t = Table::new(&[
        "mu",
        "T",
        "epsilon",
        "terminal_norm",
        "free_terminal_norm",
        "J",
        "iterations",
        "relative_terminal_norm",
        "terminal_audit",
    ]);
    let mut rows = Vec::new();
    for (mu, runs, symmetry) in &per_mu {
        for r in runs {
            t.push(vec![
                num(*mu),
                num(horizon),
                num(r.epsilon),
                num(r.terminal_norm),
                num(r.free_terminal_norm),
                num(r.cost),
                r.iterations.to_string(),
                num(r.relative_terminal_norm()),
                r.terminal_audit_ok().to_string(),
            ]);
        }
        let mut order: Vec<usize> = (0..runs.len()).collect();
        order.sort_by(|&a, &b| runs[b].epsilon.total_cmp(&runs[a].epsilon));
        let monotone = order.windows(2).all(|w| runs[w[1]].terminal_norm < runs[w[0]].terminal_norm);
        let audit = runs.iter().all(|r| r.terminal_audit_ok());
        let smallest = &runs[*order.last().expect("epsilons are not empty")];
        rows.push(row(c, format!("epsilon_monotone(mu={})", num(*mu)), monotone.to_string(), monotone));
        rows.push(row(c, format!("terminal_audit(mu={})", num(*mu)), audit.to_string(), audit));
        rows.push(row(
            c,
            format!("relative_terminal_norm(mu={},eps={})", num(*mu), num(smallest.epsilon)),
            num(smallest.relative_terminal_norm()),
            true,
        ));
        rows.push(row(c, format!("gramian_symmetry(mu={})", num(*mu)), num(*symmetry), *symmetry < 1e-10));
    }
    ctx.emit(c, "control.csv", &t)?;
    Ok(rows)
}

fn observability(ctx: &Context) -> Result<Vec<SummaryRow>, CliError> {
    let c = Command::Observability;
    let spec = &ctx.scenario.observability;
    let disc = scenario_disc(&ctx.geometry, spec.cells, ctx.scenario.control.polar)?;
    let cfg = ScanConfig {
        mu: ctx.scenario.design_mu(),
        horizon: ctx.scenario.horizon,
        dt_max: default_step(ctx.scenario.control.dt_max, &disc, ctx.scenario.horizon),
        scheme: ctx.scenario.control.scheme.into(),
        omega: ctx.scenario.control_omega(),
        hum: HumOptions {
            epsilon: spec.epsilon,
            cg: CgOptions { tol: ctx.scenario.control.cg_tol, max_iter: ctx.scenario.control.max_iter },
        },
        initial: initial_state(&ctx.geometry, &disc)?,
    };
    let mu_values = spec.mu.clone().unwrap_or_else(|| ctx.scenario.mu.clone());
    let scans = [
        (ScanParameter::Mu, cost_scan(&disc, &cfg, ScanParameter::Mu, &mu_values)),
        (ScanParameter::Horizon, cost_scan(&disc, &cfg, ScanParameter::Horizon, &spec.horizons)),
    ];
    let mut t = Table::new(&["parameter", "value", "C_T", "terminal_norm", "free_terminal_norm", "iterations", "error"]);
    let mut rows = Vec::new();
    for (param, scan) in &scans {
        for r in scan {
            match &r.outcome {
                Ok(v) => t.push(vec![
                    param.as_str().into(),
                    num(r.value),
                    num(v.observability),
                    num(v.terminal_norm),
                    num(v.free_terminal_norm),
                    v.iterations.to_string(),
                    String::new(),
                ]),
                Err(e) => {
                    t.push(vec![
                        param.as_str().into(),
                        num(r.value),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        e.clone(),
                    ]);
                    rows.push(row(c, format!("{}={}", param.as_str(), num(r.value)), e.clone(), false));
                }
            }
        }
    }
    ctx.emit(c, "observability.csv", &t)?;
    let mut by_t: Vec<(f64, f64)> = scans[1].1.iter().filter_map(|r| r.outcome.as_ref().ok().map(|v| (r.value, v.observability))).collect();
    by_t.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = by_t.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-6));
    rows.push(row(c, "C_T_nonincreasing_in_T", monotone.to_string(), monotone));
    let ok = scans.iter().flat_map(|(_, s)| s).filter(|r| r.outcome.is_ok()).count();
    rows.push(row(c, "completed_runs", ok.to_string(), true));
    Ok(rows)
}

/// Files written by a command, relative to the output directory.
pub fn outputs(command: Command) -> &'static [&'static str] {
    match command {
        Command::AuditWeights => &["audit.csv", "lambda_search.csv"],
        Command::Hardy => &["hardy.csv", "coercivity.csv", "inequalities.csv", "appendix.csv"],
        Command::Simulate => &["dichotomy.csv", "energy.csv", "trajectory.csv"],
        Command::Control => &["control.csv"],
        Command::Observability => &["observability.csv"],
        Command::Report => &[
            "audit.csv",
            "lambda_search.csv",
            "hardy.csv",
            "coercivity.csv",
            "inequalities.csv",
            "appendix.csv",
            "dichotomy.csv",
            "energy.csv",
            "trajectory.csv",
            "control.csv",
            "observability.csv",
        ],
    }
}
