use geometry::{DomainGeometry, Regions, Shape, SubsetShape, SAFETY_FACTOR};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::poly::EvenPoly;
use crate::recipe::{delta_clauses, DeltaInputs, RecipeChoice};
use crate::WeightsError;

/// Value, gradient and Hessian of a scalar field at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarJet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl ScalarJet {
    pub fn laplacian(&self) -> f64 {
        self.hess.trace()
    }
}

/// A smooth scalar field on the domain.
pub trait PsiField: Send + Sync {
    fn dim(&self) -> usize;
    fn jet(&self, x: &DVector<f64>) -> ScalarJet;
}

/// Constant field, mostly useful as a closed-form reference.
#[derive(Clone, Debug)]
pub struct ConstantPsi {
    pub dim: usize,
    pub value: f64,
}

impl PsiField for ConstantPsi {
    fn dim(&self) -> usize {
        self.dim
    }

    fn jet(&self, _x: &DVector<f64>) -> ScalarJet {
        ScalarJet { value: self.value, grad: DVector::zeros(self.dim), hess: DMatrix::zeros(self.dim, self.dim) }
    }
}

/// Smoothed boundary distance `psi_1`.
///
/// Both variants coincide with `rho` on a collar of width `collar` and are
/// even polynomials of the distance to a single peak inside it.
#[derive(Clone, Debug, PartialEq)]
pub enum Psi1 {
    /// Radial about `center` in a disk of radius `outer`: `psi_1 = F(|x - c|)`
    /// for `|x - c| < outer - collar` and `outer - |x - c|` beyond.
    Radial { center: DVector<f64>, outer: f64, collar: f64, profile: EvenPoly },
    /// Two-sided profile on `(0, length)` with its peak at `peak`.
    Interval { length: f64, peak: f64, collar: f64, left: EvenPoly, right: EvenPoly },
}

impl Psi1 {
    pub fn collar(&self) -> f64 {
        match self {
            Psi1::Radial { collar, .. } | Psi1::Interval { collar, .. } => *collar,
        }
    }

    /// The unique critical point.
    pub fn critical_point(&self) -> DVector<f64> {
        match self {
            Psi1::Radial { center, .. } => center.clone(),
            Psi1::Interval { peak, .. } => DVector::from_element(1, *peak),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Psi1::Radial { center, .. } => center.len(),
            Psi1::Interval { .. } => 1,
        }
    }

    pub fn jet(&self, x: &DVector<f64>) -> ScalarJet {
        match self {
            Psi1::Radial { center, outer, collar, profile } => {
                let n = center.len();
                let d = x - center;
                let r = d.norm();
                let rc = outer - collar;
                if r >= rc {
                    let u = &d / r;
                    let hess = -(DMatrix::identity(n, n) - &u * u.transpose()) / r;
                    let gap = outer * outer - center.norm_squared() + 2.0 * x.dot(center) - x.norm_squared();
                    ScalarJet { value: gap / (outer + r), grad: -u, hess }
                } else {
                    let g = profile.slope_over_r(r);
                    let h = profile.curvature_excess(r);
                    ScalarJet { value: profile.value(r), grad: &d * g, hess: DMatrix::identity(n, n) * g + &d * d.transpose() * h }
                }
            }
            Psi1::Interval { length, peak, collar, left, right } => {
                let t = x[0];
                let (v, g, h) = if t <= *collar {
                    (t, 1.0, 0.0)
                } else if t >= length - collar {
                    (length - t, -1.0, 0.0)
                } else if t < *peak {
                    let r = peak - t;
                    (left.value(r), -left.derivative(r, 1), left.derivative(r, 2))
                } else {
                    let r = t - peak;
                    (right.value(r), right.derivative(r, 1), right.derivative(r, 2))
                };
                ScalarJet { value: v, grad: DVector::from_element(1, g), hess: DMatrix::from_element(1, 1, h) }
            }
        }
    }

    /// `x . grad psi_1(x) - psi_1(x)`.
    ///
    /// In the collar of the disk this is evaluated as
    /// `(x.c psi_1 - outer |x|^2 - k r) / (r (outer + r))` with `k = outer^2 - |c|^2`,
    /// which keeps full relative accuracy as `x -> 0`.
    pub fn projection_defect(&self, x: &DVector<f64>) -> f64 {
        if let Psi1::Radial { center, outer, collar, .. } = self {
            let r = (x - center).norm();
            if r >= outer - collar {
                let k = outer * outer - center.norm_squared();
                let value = (k + 2.0 * x.dot(center) - x.norm_squared()) / (outer + r);
                return (x.dot(center) * value - outer * x.norm_squared() - k * r) / (r * (outer + r));
            }
        }
        let j = self.jet(x);
        x.dot(&j.grad) - j.value
    }

    /// Lower bound for `|grad psi_1|` outside `omega_0`, from a dense profile grid.
    fn gradient_floor(&self, omega0: &SubsetShape) -> f64 {
        const GRID: usize = 20_000;
        let floor = |p: &EvenPoly, lo: f64, hi: f64| -> f64 {
            if lo >= hi {
                return f64::INFINITY;
            }
            (0..=GRID).map(|i| lo + (hi - lo) * i as f64 / GRID as f64).map(|r| p.derivative(r, 1).abs()).fold(f64::INFINITY, f64::min)
        };
        match (self, omega0) {
            (Psi1::Radial { center, outer, collar, profile }, SubsetShape::Ball { center: c0, radius }) => {
                let lo = (radius - (c0 - center).norm()).max(0.0);
                floor(profile, lo, outer - collar).min(1.0)
            }
            (Psi1::Interval { length, peak, collar, left, right }, SubsetShape::Interval { a, b }) => {
                let l = floor(left, (peak - a).max(0.0), peak - collar);
                let r = floor(right, (b - peak).max(0.0), length - collar - peak);
                l.min(r).min(1.0)
            }
            _ => 0.0,
        }
    }
}

/// `psi_1` with its constants and the scaled weight `psi = delta (psi_1 + 1)`.
#[derive(Clone, Debug)]
pub struct PsiKit {
    psi1: Psi1,
    delta0: f64,
    delta: f64,
    delta_choice: RecipeChoice,
    delta_overridden: bool,
    psi1_sup: f64,
    dpsi1_sup: f64,
    d2psi1_sup: f64,
    d_omega: f64,
}

impl PsiKit {
    pub fn psi1_field(&self) -> &Psi1 {
        &self.psi1
    }

    pub fn dim(&self) -> usize {
        self.psi1.dim()
    }

    /// Width of the collar on which `psi_1 = rho`.
    pub fn collar(&self) -> f64 {
        self.psi1.collar()
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The recipe evaluation that produced the default `delta`.
    pub fn delta_choice(&self) -> &RecipeChoice {
        &self.delta_choice
    }

    pub fn delta_overridden(&self) -> bool {
        self.delta_overridden
    }

    pub fn psi1_sup(&self) -> f64 {
        self.psi1_sup
    }

    pub fn dpsi1_sup(&self) -> f64 {
        self.dpsi1_sup
    }

    /// `sum_ij sup |d_ij psi_1|`.
    pub fn d2psi1_sup(&self) -> f64 {
        self.d2psi1_sup
    }

    /// Padded sup of `|x . grad psi_1 - psi_1| / |x|^2`.
    pub fn d_omega(&self) -> f64 {
        self.d_omega
    }

    pub fn psi_sup(&self) -> f64 {
        self.delta * (self.psi1_sup + 1.0)
    }

    pub fn dpsi_sup(&self) -> f64 {
        self.delta * self.dpsi1_sup
    }

    pub fn d2psi_sup(&self) -> f64 {
        self.delta * self.d2psi1_sup
    }

    pub fn psi1(&self, x: &DVector<f64>) -> ScalarJet {
        self.psi1.jet(x)
    }

    /// `x . grad psi(x) - delta psi_1(x)`.
    pub fn projection_defect(&self, x: &DVector<f64>) -> f64 {
        self.delta * self.psi1.projection_defect(x)
    }

    pub fn psi(&self, x: &DVector<f64>) -> ScalarJet {
        let j = self.psi1.jet(x);
        ScalarJet { value: self.delta * (j.value + 1.0), grad: j.grad * self.delta, hess: j.hess * self.delta }
    }

    /// Replaces `delta`; the recipe values are kept for reporting.
    pub fn with_delta(mut self, delta: f64) -> Result<Self, WeightsError> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(WeightsError::InvalidKit(format!("delta must be positive, got {delta}")));
        }
        self.delta_overridden = delta != self.delta_choice.value;
        self.delta = delta;
        Ok(self)
    }
}

impl PsiField for PsiKit {
    fn dim(&self) -> usize {
        self.psi1.dim()
    }

    fn jet(&self, x: &DVector<f64>) -> ScalarJet {
        self.psi(x)
    }
}

pub const DEFAULT_PSI_SEED: u64 = 0x5eed_0001;
const VERIFY_SAMPLES: usize = 10_000;

pub fn build_psi(geometry: &DomainGeometry, regions: &Regions) -> Result<PsiKit, WeightsError> {
    build_psi_seeded(geometry, regions, DEFAULT_PSI_SEED)
}

/// Constructs `psi_1`, its constants and `delta`, then verifies the kit on
/// `10^4` seeded samples.
pub fn build_psi_seeded(geometry: &DomainGeometry, regions: &Regions, seed: u64) -> Result<PsiKit, WeightsError> {
    let psi1 = match geometry.shape() {
        Shape::TangentDisk { radius } => radial_psi1(geometry, regions, radius)?,
        Shape::Interval { length } => interval_psi1(regions, length, geometry.beta0())?,
        Shape::ParabolaCap { .. } => {
            return Err(WeightsError::Unsupported("psi_1 is only constructed for the interval and the tangent disk".into()))
        }
    };
    let dense = dense_samples(geometry, &psi1);
    let mut psi1_sup = 0.0f64;
    let mut dpsi1_sup = 0.0f64;
    let n = psi1.dim();
    let mut d2 = DMatrix::<f64>::zeros(n, n);
    for x in &dense {
        let j = psi1.jet(x);
        psi1_sup = psi1_sup.max(j.value.abs());
        dpsi1_sup = dpsi1_sup.max(j.grad.norm());
        d2.zip_apply(&j.hess, |a, b| *a = a.max(b.abs()));
    }
    let d2psi1_sup = d2.sum();
    let delta0 = psi1.gradient_floor(&regions.omega0);
    if !(delta0 > 0.0) {
        return Err(WeightsError::ConstructionFailure { point: psi1.critical_point().iter().copied().collect() });
    }
    let d_sup = dense
        .iter()
        .chain(near_origin_samples(geometry).iter())
        .filter(|x| x.norm() > 0.0)
        .map(|x| psi1.projection_defect(x).abs() / x.norm_squared())
        .fold(0.0, f64::max);
    let d_omega = SAFETY_FACTOR * d_sup;
    let delta_choice = delta_clauses(&DeltaInputs {
        delta0,
        tangency: geometry.tangency_constant(),
        d_omega,
        r_omega: geometry.r_omega(),
        dpsi1_sup,
        d2psi1_sup,
    })?;
    let kit =
        PsiKit { psi1, delta0, delta: delta_choice.value, delta_choice, delta_overridden: false, psi1_sup, dpsi1_sup, d2psi1_sup, d_omega };
    verify_kit(&kit, geometry, regions, seed)?;
    Ok(kit)
}

fn radial_psi1(geometry: &DomainGeometry, regions: &Regions, radius: f64) -> Result<Psi1, WeightsError> {
    let center = geometry.disk_center().expect("disk geometry");
    if !regions.omega0.contains(&center) {
        return Err(WeightsError::ConstructionFailure { point: center.iter().copied().collect() });
    }
    let collar = geometry.beta0();
    let rc = radius - collar;
    let profile = EvenPoly::fit_collar(&[], &[0, 1, 2, 3, 4], rc, collar)
        .ok_or_else(|| WeightsError::ConstructionFailure { point: center.iter().copied().collect() })?;
    if !monotone(&profile, rc) {
        return Err(WeightsError::ConstructionFailure { point: center.iter().copied().collect() });
    }
    Ok(Psi1::Radial { center, outer: radius, collar, profile })
}

fn monotone(p: &EvenPoly, rc: f64) -> bool {
    (0..=300).all(|i| p.slope_over_r(rc * i as f64 / 300.0) < 0.0)
}

fn interval_psi1(regions: &Regions, length: f64, beta0: f64) -> Result<Psi1, WeightsError> {
    let SubsetShape::Interval { a, b } = regions.omega0 else {
        return Err(WeightsError::InvalidKit("omega_0 must be an interval in one dimension".into()));
    };
    let peak = 0.5 * (a + b);
    let fail = || WeightsError::ConstructionFailure { point: vec![peak] };
    let collar = (0.5 * a).min(0.5 * (length - b)).min(beta0);
    if !(collar > 0.0) {
        return Err(fail());
    }
    let rl = peak - collar;
    let rr = length - collar - peak;
    let (rmin, rmax) = (rl.min(rr), rl.max(rr));
    const NA: usize = 105;
    const NK: usize = 121;
    let probe = |p: &EvenPoly, lo: f64, hi: f64| -> (f64, f64, f64) {
        let mut floor = f64::INFINITY;
        let mut slope = 0.0f64;
        let mut curv = 0.0f64;
        for i in 0..=300 {
            let r = hi * i as f64 / 300.0;
            let d1 = p.derivative(r, 1).abs();
            if r >= lo {
                floor = floor.min(d1);
            }
            slope = slope.max(d1);
            curv = curv.max(p.derivative(r, 2).abs());
        }
        (floor, slope, curv)
    };
    let mut best: Option<(f64, EvenPoly, EvenPoly)> = None;
    for i in 0..NA {
        let a0 = collar + 2.0 * rmax * (i + 1) as f64 / NA as f64;
        for j in 0..NK {
            let a2 = -(10f64).powf(-2.5 + 4.0 * j as f64 / (NK - 1) as f64) / rmin;
            let (Some(left), Some(right)) = (
                EvenPoly::fit_collar(&[a0, a2], &[2, 3, 4, 5, 6], rl, collar),
                EvenPoly::fit_collar(&[a0, a2], &[2, 3, 4, 5, 6], rr, collar),
            ) else {
                continue;
            };
            if !monotone(&left, rl) || !monotone(&right, rr) {
                continue;
            }
            let (fl, sl, cl) = probe(&left, peak - a, rl);
            let (fr, sr, cr) = probe(&right, b - peak, rr);
            let d0 = fl.min(fr).min(1.0);
            let score = d0 * d0 / (1.0 + sl.max(sr).max(1.0) + 2.0 * cl.max(cr));
            if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
                best = Some((score, left, right));
            }
        }
    }
    let (_, left, right) = best.ok_or_else(fail)?;
    Ok(Psi1::Interval { length, peak, collar, left, right })
}

/// Deterministic grid on which the sup-norms are evaluated.
fn dense_samples(geometry: &DomainGeometry, psi1: &Psi1) -> Vec<DVector<f64>> {
    match psi1 {
        Psi1::Interval { length, peak, collar, .. } => {
            let mut v: Vec<f64> = (0..=20_000).map(|i| length * i as f64 / 20_000.0).collect();
            v.extend([*peak, *collar, length - collar]);
            v.into_iter().map(|t| DVector::from_element(1, t)).collect()
        }
        Psi1::Radial { center, outer, collar, .. } => {
            let rc = outer - collar;
            let mut radii: Vec<f64> = (0..=400).map(|i| outer * i as f64 / 400.0).collect();
            radii.extend([rc, rc * (1.0 - 1e-9), rc * (1.0 + 1e-9)]);
            let mut out = Vec::new();
            for r in radii {
                for k in 0..64 {
                    let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 64.0;
                    let x = center + DVector::from_vec(vec![r * a.cos(), r * a.sin()]);
                    if geometry.contains(&x) {
                        out.push(x);
                    }
                }
            }
            out
        }
    }
}

fn near_origin_samples(geometry: &DomainGeometry) -> Vec<DVector<f64>> {
    (1..=40).flat_map(|j| geometry.radial_samples(geometry.r_omega() * 0.5f64.powi(j), 32)).collect()
}

fn verify_kit(kit: &PsiKit, geometry: &DomainGeometry, regions: &Regions, seed: u64) -> Result<(), WeightsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = geometry.r_omega();
    let collar = kit.collar();
    let tol = 1e-10 * scale.max(1.0);
    let violation =
        |check: &str, x: &DVector<f64>| WeightsError::InvariantViolation { check: check.to_string(), point: x.iter().copied().collect() };
    let mut points: Vec<DVector<f64>> = (0..VERIFY_SAMPLES).map(|_| geometry.sample_interior(&mut rng)).collect();
    points.extend(geometry.collar_samples(2000));
    points.extend(near_origin_samples(geometry));
    for x in &points {
        let rho = geometry.distance_to_boundary(x)?;
        let j = kit.psi1(x);
        if rho < collar && (j.value - rho).abs() > tol {
            return Err(violation("psi_1 = rho on the collar", x));
        }
        if rho > collar * (1.0 + 1e-9) && j.value <= collar {
            return Err(violation("psi_1 > beta on the inner region", x));
        }
        if !regions.omega0.contains_closure(x) && j.grad.norm() < kit.delta0 * (1.0 - 1e-9) {
            return Err(violation("gradient floor outside omega_0", x));
        }
        let p = kit.psi(x);
        if !(p.value > kit.delta || rho == 0.0) {
            return Err(violation("psi > delta in the interior", x));
        }
        if !regions.omega0.contains_closure(x) && p.grad.norm() <= 2.0 * geometry.tangency_constant() && kit.delta_choice.value == kit.delta
        {
            return Err(violation("|grad psi| > 2 C_Omega outside omega_0", x));
        }
    }
    for p in geometry.boundary_samples(2000) {
        if (kit.psi(&p).value - kit.delta).abs() > kit.delta * tol {
            return Err(violation("psi = delta on the boundary", &p));
        }
        let Ok(n) = geometry.outward_normal(&p) else { continue };
        let level = &p - n * collar;
        if geometry.contains_open(&level) && (kit.psi1(&level).value - collar).abs() > tol {
            return Err(violation("psi_1 = beta on the level set", &level));
        }
    }
    Ok(())
}
