use geometry::{DomainGeometry, Regions};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use weights::{TauJet, WeightConfig};

use crate::margin::{relative_margin, Margin};
use crate::sampling::{stratified_samples, unit_directions, AuditSamples, SampleCounts};
use crate::terms::{t_terms_from_jet, TTerms};
use crate::AuditError;

/// Smallest `lambda` for which the near-origin Hessian bound of `tau_phi` is claimed.
pub const PHI_HESSIAN_MIN_LAMBDA: f64 = 6.0;
/// Default `lambda` grid for [`Auditor::find_lambda0`].
pub const DEFAULT_LAMBDA_GRID: [f64; 6] = [6.0, 8.0, 12.0, 16.0, 24.0, 32.0];
/// Relative margin demanded in strict mode.
pub const STRICT_MARGIN: f64 = 1e-12;
const PADDING: f64 = 1.1;
const IDENTITY_TOL: f64 = 1e-9;
const BOUNDARY_FORMULA_TOL: f64 = 1e-10;
const CALIBRATION_SALT: u64 = 0xca11_b4a7_e000_0001;

/// Audited inequalities and identities, in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckId {
    /// `|x . grad psi - delta psi_1| <= delta D |x|^2` on the domain.
    ProjectionDefect,
    /// `D^2 tau_x2 >= 0` and `Delta tau_x2 >= 0` below `r_0`.
    X2HessianNonneg,
    /// `|D^2 tau_x2(xi, xi)| <= D1` on the domain.
    X2HessianBound,
    /// `|Delta tau_x2| <= D1` on the domain.
    X2LaplacianBound,
    /// `D^2 tau_phi(xi, xi) >= q r_0^2 / 2` below `r_0`.
    PhiHessianNear,
    /// `Delta tau_phi >= lambda q |x|^2` off `closure(omega_0)`.
    PhiLaplacian,
    /// `D^2 tau_phi(xi, xi) >= -lambda D4 (|x|/r_0)^(lambda-2) phi` on the domain.
    PhiHessianGlobal,
    /// The splitting into `T1 + T2 + T3` is exact.
    TIdentity,
    T1Near,
    T1Bulk,
    T1Core,
    T2Near,
    T2Far,
    T3Lower,
    T3Upper,
    GradNear,
    GradBulk,
    GradCore,
    /// `-grad tau . n >= 0` on the boundary.
    BoundarySign,
    /// The boundary margin agrees with its closed form.
    BoundaryFormula,
}

impl CheckId {
    pub const ALL: [CheckId; 20] = [
        CheckId::ProjectionDefect,
        CheckId::X2HessianNonneg,
        CheckId::X2HessianBound,
        CheckId::X2LaplacianBound,
        CheckId::PhiHessianNear,
        CheckId::PhiLaplacian,
        CheckId::PhiHessianGlobal,
        CheckId::TIdentity,
        CheckId::T1Near,
        CheckId::T1Bulk,
        CheckId::T1Core,
        CheckId::T2Near,
        CheckId::T2Far,
        CheckId::T3Lower,
        CheckId::T3Upper,
        CheckId::GradNear,
        CheckId::GradBulk,
        CheckId::GradCore,
        CheckId::BoundarySign,
        CheckId::BoundaryFormula,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckId::ProjectionDefect => "projection_defect",
            CheckId::X2HessianNonneg => "x2_hessian_nonneg",
            CheckId::X2HessianBound => "x2_hessian_bound",
            CheckId::X2LaplacianBound => "x2_laplacian_bound",
            CheckId::PhiHessianNear => "phi_hessian_lower_near",
            CheckId::PhiLaplacian => "phi_laplacian_lower",
            CheckId::PhiHessianGlobal => "phi_hessian_lower_global",
            CheckId::TIdentity => "t_identity",
            CheckId::T1Near => "t1_lower_near",
            CheckId::T1Bulk => "t1_lower_bulk",
            CheckId::T1Core => "t1_bound_core",
            CheckId::T2Near => "t2_lower_near",
            CheckId::T2Far => "t2_nonneg_far",
            CheckId::T3Lower => "t3_lower",
            CheckId::T3Upper => "t3_upper",
            CheckId::GradNear => "grad_lower_near",
            CheckId::GradBulk => "grad_lower_bulk",
            CheckId::GradCore => "grad_upper_core",
            CheckId::BoundarySign => "boundary_sign",
            CheckId::BoundaryFormula => "boundary_formula",
        }
    }

    pub fn region(&self) -> Region {
        use CheckId::*;
        match self {
            ProjectionDefect | X2HessianBound | X2LaplacianBound | PhiHessianGlobal | TIdentity | T3Upper => Region::Domain,
            X2HessianNonneg | PhiHessianNear | T1Near | T2Near | GradNear => Region::NearSingularity,
            PhiLaplacian | T3Lower => Region::OutsideControl,
            T1Bulk | GradBulk => Region::Bulk,
            T2Far => Region::Far,
            T1Core | GradCore => Region::ControlCore,
            BoundarySign | BoundaryFormula => Region::Boundary,
        }
    }

    pub fn depends_on_lambda(&self) -> bool {
        !matches!(self, CheckId::ProjectionDefect | CheckId::X2HessianNonneg | CheckId::X2HessianBound | CheckId::X2LaplacianBound)
    }
}

impl std::fmt::Display for CheckId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Point sets on which checks are stated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Domain,
    /// `|x| < r_0`.
    NearSingularity,
    /// Outside `closure(omega_0)`.
    OutsideControl,
    /// Outside `closure(omega_0)` with `|x| >= r_0`.
    Bulk,
    /// `|x| > r_0`.
    Far,
    /// Inside `omega_0`.
    ControlCore,
    Boundary,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::Domain => "domain",
            Region::NearSingularity => "near_singularity",
            Region::OutsideControl => "outside_control",
            Region::Bulk => "bulk",
            Region::Far => "far",
            Region::ControlCore => "control_core",
            Region::Boundary => "boundary",
        }
    }

    fn contains(&self, regions: &Regions, r0: f64, x: &DVector<f64>) -> bool {
        let r = x.norm();
        match self {
            Region::Domain => true,
            Region::NearSingularity => r < r0,
            Region::OutsideControl => !regions.omega0.contains_closure(x),
            Region::Bulk => r >= r0 && !regions.omega0.contains_closure(x),
            Region::Far => r > r0,
            Region::ControlCore => regions.omega0.contains(x),
            Region::Boundary => false,
        }
    }
}

/// Outcome of one check over its region.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRecord {
    pub check: CheckId,
    pub region: Region,
    /// `None` for checks that do not involve `lambda`.
    pub lambda: Option<f64>,
    pub samples: usize,
    /// Smallest `LHS - RHS` over the samples.
    pub min_margin: Margin,
    /// Smallest `(LHS - RHS) / (|LHS| + |RHS|)`.
    pub min_relative: f64,
    pub violations: usize,
    /// Point attaining `min_margin`.
    pub worst_x: Vec<f64>,
}

impl CheckRecord {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Constants computed as sampled sups times 1.1, except `d4` which is explicit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditConstants {
    pub d1: f64,
    pub d4: f64,
    pub d5: f64,
    pub d6: f64,
    pub d7: f64,
    pub d8: f64,
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub lambda: f64,
    pub records: Vec<CheckRecord>,
    pub constants: AuditConstants,
    pub pass: bool,
    pub sample_count: usize,
}

impl AuditReport {
    fn new(lambda: f64, records: Vec<CheckRecord>, constants: AuditConstants, sample_count: usize) -> Self {
        let pass = records.iter().all(CheckRecord::passed);
        Self { lambda, records, constants, pass, sample_count }
    }

    pub fn record(&self, id: CheckId) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.check == id)
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.passed())
    }
}

/// One row of the `lambda` search.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaTrial {
    pub lambda: f64,
    pub pass: bool,
    pub failing: Vec<CheckId>,
}

#[derive(Clone, Debug)]
pub struct Lambda0 {
    pub lambda0: f64,
    pub report: AuditReport,
    pub trials: Vec<LambdaTrial>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditOptions {
    /// A sample violates a check when its relative margin is below this value.
    pub required_relative: f64,
    pub seed: u64,
    pub counts: SampleCounts,
    pub directions: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { required_relative: 0.0, seed: 0xa0d1_7001, counts: SampleCounts::default(), directions: 64 }
    }
}

impl AuditOptions {
    pub fn strict(mut self) -> Self {
        self.required_relative = STRICT_MARGIN;
        self
    }
}

/// One evaluated inequality `lhs >= rhs`, both divided by `exp(ln_scale)`.
#[derive(Clone, Copy, Debug)]
struct Entry {
    check: CheckId,
    lhs: f64,
    rhs: f64,
    ln_scale: f64,
}

struct Tally {
    check: CheckId,
    samples: usize,
    violations: usize,
    min_margin: Margin,
    min_relative: f64,
    worst_x: Vec<f64>,
}

impl Tally {
    fn new(check: CheckId) -> Self {
        Self { check, samples: 0, violations: 0, min_margin: Margin::ZERO, min_relative: f64::INFINITY, worst_x: Vec::new() }
    }

    fn push(&mut self, x: &DVector<f64>, e: &Entry, required: f64) {
        let margin = Margin::from_scaled(e.lhs - e.rhs, e.ln_scale);
        let rel = relative_margin(e.lhs, e.rhs);
        if rel.is_nan() || rel < required {
            self.violations += 1;
        }
        let rel = if rel.is_nan() { f64::NEG_INFINITY } else { rel };
        if self.samples == 0 || margin < self.min_margin || margin == Margin::NEG_INFINITY {
            self.min_margin = margin;
            self.worst_x = x.iter().copied().collect();
        }
        self.min_relative = self.min_relative.min(rel);
        self.samples += 1;
    }

    fn finish(self, lambda: Option<f64>) -> CheckRecord {
        CheckRecord {
            check: self.check,
            region: self.check.region(),
            lambda,
            samples: self.samples,
            min_margin: self.min_margin,
            min_relative: if self.samples == 0 { 1.0 } else { self.min_relative },
            violations: self.violations,
            worst_x: self.worst_x,
        }
    }
}

fn min_form(m: &DMatrix<f64>, dirs: &[DVector<f64>]) -> f64 {
    dirs.iter().map(|v| v.dot(&(m * v))).fold(f64::INFINITY, f64::min)
}

fn max_abs_form(m: &DMatrix<f64>, dirs: &[DVector<f64>]) -> f64 {
    dirs.iter().map(|v| v.dot(&(m * v)).abs()).fold(0.0, f64::max)
}

/// Runs the pointwise audit for one scenario on fixed samples.
#[derive(Clone, Debug)]
pub struct Auditor {
    geometry: DomainGeometry,
    regions: Regions,
    base: WeightConfig,
    options: AuditOptions,
    samples: AuditSamples,
    calibration: AuditSamples,
    directions: Vec<DVector<f64>>,
    d1: f64,
}

impl Auditor {
    pub fn new(geometry: &DomainGeometry, regions: &Regions, base: WeightConfig, options: AuditOptions) -> Result<Self, AuditError> {
        if !(options.required_relative >= 0.0 && options.required_relative < 1.0) {
            return Err(AuditError::InvalidOption(format!(
                "required relative margin must lie in [0, 1), got {}",
                options.required_relative
            )));
        }
        if options.directions == 0 {
            return Err(AuditError::InvalidOption("at least one direction is needed".into()));
        }
        let r0 = base.r0();
        let regions = regions.clone().with_r0(r0);
        let samples = stratified_samples(geometry, &regions, r0, options.counts, options.seed);
        let calibration = stratified_samples(geometry, &regions, r0, options.counts.halved(), options.seed ^ CALIBRATION_SALT);
        let directions = unit_directions(geometry.dim(), options.directions);
        let d1 = PADDING
            * calibration
                .interior
                .par_iter()
                .map(|x| {
                    let j = base.tau_jet(x);
                    max_abs_form(&j.x2.hess, &directions).max(j.x2.lap.abs())
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(0.0, f64::max);
        Ok(Self { geometry: geometry.clone(), regions, base, options, samples, calibration, directions, d1 })
    }

    pub fn samples(&self) -> &AuditSamples {
        &self.samples
    }

    pub fn options(&self) -> &AuditOptions {
        &self.options
    }

    pub fn base(&self) -> &WeightConfig {
        &self.base
    }

    pub fn weights_at(&self, lambda: f64) -> Result<WeightConfig, AuditError> {
        if lambda == self.base.lambda() {
            Ok(self.base.clone())
        } else {
            Ok(self.base.with_lambda(lambda, &self.geometry)?)
        }
    }

    /// Constants at `lambda`, from the calibration samples.
    pub fn constants(&self, w: &WeightConfig) -> AuditConstants {
        let r0 = w.r0();
        let kit = w.kit();
        let d4 = (3.0 + kit.d2psi_sup() * self.geometry.r_omega().powi(2)) / (r0 * r0);
        let stats: Vec<(f64, f64, f64, f64)> = self
            .calibration
            .interior
            .par_iter()
            .map(|x| {
                let jet = w.tau_jet(x);
                let t = t_terms_from_jet(w, &jet, x);
                let bulk = Region::Bulk.contains(&self.regions, r0, x);
                let core = Region::ControlCore.contains(&self.regions, r0, x);
                let neg_inf = f64::NEG_INFINITY;
                let d5 = if bulk && t.grad2_s > 0.0 { -t.t1_ratio } else { neg_inf };
                let d6 = if core && t.grad2_s > 0.0 { t.t1_ratio.abs() } else { neg_inf };
                let d7 = if t.grad2_s > 0.0 { t.t3_ratio } else { neg_inf };
                let d8 = if core { t.grad2_s / (t.q_s * t.q_s * x.norm_squared().powi(2)) } else { neg_inf };
                (d5, d6, d7, d8)
            })
            .collect();
        let sup = |f: fn(&(f64, f64, f64, f64)) -> f64| PADDING * stats.iter().map(f).fold(0.0, f64::max);
        AuditConstants { d1: self.d1, d4, d5: sup(|s| s.0), d6: sup(|s| s.1), d7: sup(|s| s.2), d8: sup(|s| s.3) }
    }

    /// All entries at one interior point.
    fn interior_entries(&self, w: &WeightConfig, c: &AuditConstants, x: &DVector<f64>, with_lambda: bool) -> Vec<Entry> {
        let r0 = w.r0();
        let jet: TauJet = w.tau_jet(x);
        let kit = w.kit();
        let r2 = x.norm_squared();
        let dirs = &self.directions;
        let near = Region::NearSingularity.contains(&self.regions, r0, x);
        let outside = Region::OutsideControl.contains(&self.regions, r0, x);
        let bulk = Region::Bulk.contains(&self.regions, r0, x);
        let far = Region::Far.contains(&self.regions, r0, x);
        let core = Region::ControlCore.contains(&self.regions, r0, x);
        let e = |check, lhs, rhs, ln_scale| Entry { check, lhs, rhs, ln_scale };
        let mut out = Vec::with_capacity(16);

        if !with_lambda {
            let defect = kit.projection_defect(x).abs();
            out.push(e(CheckId::ProjectionDefect, kit.delta() * kit.d_omega() * r2, defect, 0.0));
            if near {
                let lo = min_form(&jet.x2.hess, dirs).min(jet.x2.lap);
                out.push(e(CheckId::X2HessianNonneg, lo, 0.0, 0.0));
            }
            out.push(e(CheckId::X2HessianBound, c.d1, max_abs_form(&jet.x2.hess, dirs), 0.0));
            out.push(e(CheckId::X2LaplacianBound, c.d1, jet.x2.lap.abs(), 0.0));
            return out;
        }

        let lambda = w.lambda();
        let ls = jet.ln_scale;
        let q = jet.q;
        let phi_min = min_form(&jet.phi.hess, dirs);
        if near {
            out.push(e(CheckId::PhiHessianNear, phi_min, 0.5 * q * r0 * r0, ls));
        }
        if outside {
            out.push(e(CheckId::PhiLaplacian, jet.phi.lap, lambda * q * r2, ls));
        }
        let d4_rel = 3.0 + kit.d2psi_sup() * self.geometry.r_omega().powi(2);
        out.push(e(CheckId::PhiHessianGlobal, phi_min, -d4_rel * q, ls));

        let t: TTerms = t_terms_from_jet(w, &jet, x);
        let l3 = 3.0 * ls;
        let l2 = 2.0 * ls;
        let inv_s = (-ls).exp();
        let sum = t.t1_s + t.t2_s + t.t3_s;
        out.push(e(CheckId::TIdentity, IDENTITY_TOL * ((-l3).exp() + t.lhs_s.abs()), (t.lhs_s - sum).abs(), l3));
        // T1 is quadratic in grad tau, so it is compared in units of s^2.
        let g2 = t.grad2_s;
        if near {
            out.push(e(CheckId::T1Near, t.t1_ratio * g2, g2, l2));
            let a = kit.dpsi_sup();
            let p = jet.psi.value;
            let rhs = -q * lambda * r2 * r2 * a * a * (8.0 * p * p + 2.0) * inv_s * inv_s;
            out.push(e(CheckId::T2Near, t.t2_s, rhs, l3));
            out.push(e(CheckId::GradNear, g2, r2 * inv_s * inv_s, l2));
        }
        if bulk {
            out.push(e(CheckId::T1Bulk, t.t1_ratio * g2, -c.d5 * g2, l2));
            out.push(e(CheckId::GradBulk, g2, q * q * r2 * r2, l2));
        }
        if core {
            out.push(e(CheckId::T1Core, c.d6 * g2, (t.t1_ratio * g2).abs(), l2));
            out.push(e(CheckId::GradCore, c.d8 * q * q * r2 * r2, g2, l2));
        }
        if far {
            out.push(e(CheckId::T2Far, t.t2_s, 0.0, l3));
        }
        if outside {
            out.push(e(CheckId::T3Lower, t.t3_s, lambda * q * (1.0 + r2) * g2, l3));
        }
        out.push(e(CheckId::T3Upper, c.d7 * lambda * q * g2, t.t3_s, l3));
        out
    }

    fn boundary_entries(&self, w: &WeightConfig, p: &DVector<f64>) -> Result<Vec<Entry>, AuditError> {
        let n = self.geometry.outward_normal(p)?;
        let jet = w.tau_jet(p);
        let ls = jet.ln_scale;
        let inv_s = (-ls).exp();
        let grad = jet.total().grad;
        let margin = -grad.dot(&n);
        let psi = jet.psi.value;
        let r2 = p.norm_squared();
        let xn = p.dot(&n);
        let gn = jet.psi.grad.norm();
        let closed = (-2.0 * psi * xn + r2 * gn) * inv_s + jet.q * (r2 * gn - xn);
        Ok(vec![
            Entry { check: CheckId::BoundarySign, lhs: margin, rhs: 0.0, ln_scale: ls },
            Entry {
                check: CheckId::BoundaryFormula,
                lhs: BOUNDARY_FORMULA_TOL * (margin.abs() + closed.abs()),
                rhs: (margin - closed).abs(),
                ln_scale: ls,
            },
        ])
    }

    fn tally(&self, ids: &[CheckId], lambda: Option<f64>, points: &[DVector<f64>], per_point: &[Vec<Entry>]) -> Vec<CheckRecord> {
        let mut tallies: Vec<Tally> = ids.iter().map(|&id| Tally::new(id)).collect();
        for (x, entries) in points.iter().zip(per_point) {
            for e in entries {
                if let Some(t) = tallies.iter_mut().find(|t| t.check == e.check) {
                    t.push(x, e, self.options.required_relative);
                }
            }
        }
        tallies.into_iter().map(|t| t.finish(lambda)).collect()
    }

    fn interior_records(&self, w: &WeightConfig, c: &AuditConstants, ids: &[CheckId], with_lambda: bool) -> Vec<CheckRecord> {
        let per_point: Vec<Vec<Entry>> = self.samples.interior.par_iter().map(|x| self.interior_entries(w, c, x, with_lambda)).collect();
        self.tally(ids, with_lambda.then(|| w.lambda()), &self.samples.interior, &per_point)
    }

    /// The projection defect of `psi`, which does not involve `lambda`.
    pub fn check_projection_defect(&self) -> Vec<CheckRecord> {
        let c = AuditConstants { d1: self.d1, d4: 0.0, d5: 0.0, d6: 0.0, d7: 0.0, d8: 0.0 };
        self.interior_records(&self.base, &c, &[CheckId::ProjectionDefect], false)
    }

    /// Sign and size of the Hessian and Laplacian of `|x|^2 psi`.
    pub fn check_x2_bounds(&self) -> Vec<CheckRecord> {
        let c = AuditConstants { d1: self.d1, d4: 0.0, d5: 0.0, d6: 0.0, d7: 0.0, d8: 0.0 };
        self.interior_records(&self.base, &c, &[CheckId::X2HessianNonneg, CheckId::X2HessianBound, CheckId::X2LaplacianBound], false)
    }

    /// Lower bounds on the Hessian and Laplacian of the exponential part.
    pub fn check_phi_bounds(&self, lambda: f64) -> Result<Vec<CheckRecord>, AuditError> {
        self.lambda_checks(lambda, &[CheckId::PhiHessianNear, CheckId::PhiLaplacian, CheckId::PhiHessianGlobal])
    }

    /// The pointwise bounds on `T1`, `T2`, `T3` and `|grad tau|^2`.
    pub fn check_t_terms(&self, lambda: f64) -> Result<Vec<CheckRecord>, AuditError> {
        use CheckId::*;
        self.lambda_checks(lambda, &[T1Near, T1Bulk, T1Core, T2Near, T2Far, T3Lower, T3Upper, GradNear, GradBulk, GradCore])
    }

    pub fn check_t_identity(&self, lambda: f64) -> Result<Vec<CheckRecord>, AuditError> {
        self.lambda_checks(lambda, &[CheckId::TIdentity])
    }

    pub fn check_boundary_sign(&self, lambda: f64) -> Result<Vec<CheckRecord>, AuditError> {
        let w = self.weights_at(lambda)?;
        self.boundary_records(&w)
    }

    fn boundary_records(&self, w: &WeightConfig) -> Result<Vec<CheckRecord>, AuditError> {
        let per_point: Vec<Vec<Entry>> = self.samples.boundary.par_iter().map(|p| self.boundary_entries(w, p)).collect::<Result<_, _>>()?;
        Ok(self.tally(&[CheckId::BoundarySign, CheckId::BoundaryFormula], Some(w.lambda()), &self.samples.boundary, &per_point))
    }

    fn lambda_checks(&self, lambda: f64, ids: &[CheckId]) -> Result<Vec<CheckRecord>, AuditError> {
        guard_lambda(lambda)?;
        let w = self.weights_at(lambda)?;
        let c = self.constants(&w);
        Ok(self.interior_records(&w, &c, ids, true))
    }

    /// Every check at `lambda`.
    pub fn audit(&self, lambda: f64) -> Result<AuditReport, AuditError> {
        guard_lambda(lambda)?;
        let w = self.weights_at(lambda)?;
        let c = self.constants(&w);
        let statics: Vec<CheckId> = CheckId::ALL.iter().copied().filter(|id| !id.depends_on_lambda()).collect();
        let dynamic: Vec<CheckId> =
            CheckId::ALL.iter().copied().filter(|id| id.depends_on_lambda() && id.region() != Region::Boundary).collect();
        let mut records = self.interior_records(&self.base, &c, &statics, false);
        records.extend(self.interior_records(&w, &c, &dynamic, true));
        records.extend(self.boundary_records(&w)?);
        records.sort_by_key(|r| r.check);
        Ok(AuditReport::new(lambda, records, c, self.samples.len()))
    }

    /// Margins at one point for the `lambda` dependent interior checks, in entry order.
    pub fn point_margins(&self, w: &WeightConfig, constants: &AuditConstants, x: &DVector<f64>) -> Vec<(CheckId, Margin)> {
        self.interior_entries(w, constants, x, true)
            .into_iter()
            .map(|e| (e.check, Margin::from_scaled(e.lhs - e.rhs, e.ln_scale)))
            .collect()
    }

    /// Smallest `lambda` of the grid (sorted ascending) at which every check passes.
    pub fn find_lambda0(&self, grid: &[f64]) -> Result<Lambda0, AuditError> {
        if grid.is_empty() {
            return Err(AuditError::EmptyGrid);
        }
        let mut grid = grid.to_vec();
        grid.sort_by(|a, b| a.total_cmp(b));
        grid.dedup();
        for &l in &grid {
            guard_lambda(l)?;
        }
        let mut trials = Vec::new();
        let mut last = None;
        for &l in &grid {
            let report = self.audit(l)?;
            let failing: Vec<CheckId> = report.failing().map(|r| r.check).collect();
            trials.push(LambdaTrial { lambda: l, pass: report.pass, failing });
            if report.pass {
                return Ok(Lambda0 { lambda0: l, report, trials });
            }
            last = Some(report);
        }
        let report = last.expect("grid is not empty");
        let failing: Vec<CheckId> = report.failing().map(|r| r.check).collect();
        Err(AuditError::Exhausted {
            check: failing.last().copied().expect("a failing report has a failing check"),
            failing,
            lambda: report.lambda,
            report: Box::new(report),
        })
    }
}

fn guard_lambda(lambda: f64) -> Result<(), AuditError> {
    if !(lambda >= PHI_HESSIAN_MIN_LAMBDA) || !lambda.is_finite() {
        return Err(AuditError::Hypothesis { check: CheckId::PhiHessianNear.as_str(), lambda, min: PHI_HESSIAN_MIN_LAMBDA });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn entry(lhs: f64, rhs: f64) -> Entry {
        Entry { check: CheckId::GradBulk, lhs, rhs, ln_scale: 0.0 }
    }

    #[test]
    fn check_labels_are_unique() {
        let labels: HashSet<&str> = CheckId::ALL.iter().map(|c| c.as_str()).collect();
        assert_eq!(labels.len(), CheckId::ALL.len());
        let mut sorted = CheckId::ALL;
        sorted.sort();
        assert_eq!(sorted, CheckId::ALL);
    }

    #[test]
    fn tally_tracks_worst_point_and_violations() {
        let mut t = Tally::new(CheckId::GradBulk);
        let xs: Vec<DVector<f64>> = (0..4).map(|i| DVector::from_element(1, i as f64)).collect();
        t.push(&xs[0], &entry(3.0, 1.0), 0.0);
        t.push(&xs[1], &entry(1.0, 2.0), 0.0);
        t.push(&xs[2], &entry(0.0, 0.0), 0.0);
        t.push(&xs[3], &entry(f64::NAN, 0.0), 0.0);
        let r = t.finish(Some(6.0));
        assert_eq!(r.samples, 4);
        assert_eq!(r.violations, 2);
        assert_eq!(r.min_margin, Margin::NEG_INFINITY);
        assert_eq!(r.worst_x, vec![3.0]);
        assert!(!r.passed());
    }

    #[test]
    fn report_pass_flag_matches_violations() {
        let c = AuditConstants { d1: 1.0, d4: 1.0, d5: 1.0, d6: 1.0, d7: 1.0, d8: 1.0 };
        let mut t = Tally::new(CheckId::T2Far);
        t.push(&DVector::from_element(1, 0.5), &entry(1.0, 0.0), 0.0);
        let ok = t.finish(Some(6.0));
        let rep = AuditReport::new(6.0, vec![ok.clone()], c, 1);
        assert!(rep.pass);
        let mut bad = ok;
        bad.violations = 1;
        let rep = AuditReport::new(6.0, vec![bad], c, 1);
        assert!(!rep.pass && rep.failing().count() == 1);
    }

    #[test]
    fn quadratic_forms_are_homogeneous() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, -1.0]);
        let dirs = unit_directions(2, 64);
        let scaled: Vec<DVector<f64>> = dirs.iter().map(|d| d * 3.0).collect();
        assert!((min_form(&m, &scaled) - 9.0 * min_form(&m, &dirs)).abs() < 1e-12);
        assert!((max_abs_form(&m, &scaled) - 9.0 * max_abs_form(&m, &dirs)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn violations_grow_with_the_required_margin(
            pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..40),
            m1 in 0.0f64..0.5,
            dm in 0.0f64..0.5,
        ) {
            let count = |m: f64| {
                let mut t = Tally::new(CheckId::T3Upper);
                for (a, b) in &pairs {
                    t.push(&DVector::from_element(1, 1.0), &entry(*a, *b), m);
                }
                t.finish(None).violations
            };
            prop_assert!(count(m1 + dm) >= count(m1));
            prop_assert!(count(0.0) == pairs.iter().filter(|(a, b)| a < b).count());
        }
    }
}
