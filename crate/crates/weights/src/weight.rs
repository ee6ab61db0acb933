use geometry::DomainGeometry;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::psi::{PsiField, PsiKit, ScalarJet};
use crate::recipe::{r0_clauses, R0Inputs, RecipeChoice};
use crate::WeightsError;

/// Scalar weight parameters read from a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightParams {
    pub lambda: f64,
    pub s: f64,
    pub gamma: f64,
    pub horizon: f64,
    pub c3: f64,
    pub mu: f64,
}

/// One of the two parts of `tau`, possibly divided by a common scale.
#[derive(Clone, Debug, PartialEq)]
pub struct TauPart {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    pub lap: f64,
}

impl TauPart {
    fn scaled(&self, f: f64) -> TauPart {
        TauPart { value: self.value * f, grad: &self.grad * f, hess: &self.hess * f, lap: self.lap * f }
    }
}

/// `tau = tau_x2 + tau_phi` and derivatives.
///
/// `q = lambda tau_phi / |x|^2` grows like `exp(lambda psi)`. The `phi` part
/// is stored divided by `s = max(1, q) = exp(ln_scale)`, which keeps every
/// entry finite for large `lambda`; the `x2` part is stored as is.
#[derive(Clone, Debug, PartialEq)]
pub struct TauJet {
    pub ln_scale: f64,
    /// `ln q`, `-inf` at the origin when `lambda > 2`.
    pub ln_q: f64,
    /// `q / s`.
    pub q: f64,
    /// `tau_x2` parts, unscaled.
    pub x2: TauPart,
    /// `tau_phi` parts divided by `s`.
    pub phi: TauPart,
    pub psi: ScalarJet,
}

impl TauJet {
    /// `s^-1 tau` and its derivatives.
    pub fn total(&self) -> TauPart {
        let inv = (-self.ln_scale).exp();
        TauPart {
            value: self.x2.value * inv + self.phi.value,
            grad: &self.x2.grad * inv + &self.phi.grad,
            hess: &self.x2.hess * inv + &self.phi.hess,
            lap: self.x2.lap * inv + self.phi.lap,
        }
    }

    pub fn unscaled(&self) -> TauEval {
        let x2 = self.x2.clone();
        let phi = self.phi.scaled(self.ln_scale.exp());
        TauEval {
            tau_x2: x2.value,
            tau_phi: phi.value,
            grad_x2: x2.grad,
            grad_phi: phi.grad,
            hess_x2: x2.hess,
            hess_phi: phi.hess,
            lap_x2: x2.lap,
            lap_phi: phi.lap,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TauEval {
    pub tau_x2: f64,
    pub tau_phi: f64,
    pub grad_x2: DVector<f64>,
    pub grad_phi: DVector<f64>,
    pub hess_x2: DMatrix<f64>,
    pub hess_phi: DMatrix<f64>,
    pub lap_x2: f64,
    pub lap_phi: f64,
}

impl TauEval {
    pub fn tau(&self) -> f64 {
        self.tau_x2 + self.tau_phi
    }

    pub fn grad(&self) -> DVector<f64> {
        &self.grad_x2 + &self.grad_phi
    }

    pub fn hess(&self) -> DMatrix<f64> {
        &self.hess_x2 + &self.hess_phi
    }

    pub fn lap(&self) -> f64 {
        self.lap_x2 + self.lap_phi
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaEval {
    pub sigma: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    pub lap: f64,
    pub dt: f64,
    pub dtt: f64,
}

/// `C_lambda`, stored through its logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CLambda {
    pub ln_value: f64,
}

impl CLambda {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

fn ln_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln (|x|^2 psi + (|x|/r0)^lambda e^{lambda psi})`.
pub fn ln_tau(lambda: f64, psi: f64, r0: f64, x: &DVector<f64>) -> f64 {
    let r = x.norm();
    let a = if psi > 0.0 && r > 0.0 { (r * r * psi).ln() } else { f64::NEG_INFINITY };
    let b = if r > 0.0 { lambda * (r.ln() - r0.ln()) + lambda * psi } else { f64::NEG_INFINITY };
    ln_add_exp(a, b)
}

/// `C_lambda = 1.05 sup tau + 1`, the sup taken over the given points and
/// refined by a local pattern search inside the domain.
pub fn choose_c_lambda_on(lambda: f64, psi: &dyn PsiField, r0: f64, points: &[DVector<f64>], domain: Option<&DomainGeometry>) -> CLambda {
    let f = |x: &DVector<f64>| ln_tau(lambda, psi.jet(x).value, r0, x);
    let mut scored: Vec<(f64, usize)> = points.iter().enumerate().map(|(i, x)| (f(x), i)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = scored.first().map_or(f64::NEG_INFINITY, |s| s.0);
    if let Some(g) = domain {
        let n = g.dim();
        for &(v0, i) in scored.iter().take(8) {
            let mut x = points[i].clone();
            let mut v = v0;
            let mut step = 0.05 * g.r_omega();
            while step > 1e-9 * g.r_omega() {
                let mut moved = false;
                for k in 0..n {
                    for sgn in [1.0, -1.0] {
                        let mut y = x.clone();
                        y[k] += sgn * step;
                        if g.contains(&y) {
                            let w = f(&y);
                            if w > v {
                                x = y;
                                v = w;
                                moved = true;
                            }
                        }
                    }
                }
                if !moved {
                    step *= 0.5;
                }
            }
            best = best.max(v);
        }
    }
    CLambda { ln_value: best + 1.05f64.ln() + ((-best).exp() / 1.05).ln_1p() }
}

pub const C_LAMBDA_SEED: u64 = 0xc1a;

/// Standard sample used for `C_lambda`: boundary points plus seeded interior points.
pub fn c_lambda_samples(geometry: &DomainGeometry) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(C_LAMBDA_SEED);
    let mut v = geometry.boundary_samples(4000);
    v.extend((0..10_000).map(|_| geometry.sample_interior(&mut rng)));
    if geometry.dim() == 1 {
        let (lo, hi) = geometry.bounding_box();
        v.push(lo);
        v.push(hi);
    }
    v
}

pub fn choose_c_lambda(lambda: f64, kit: &PsiKit, r0: f64, geometry: &DomainGeometry) -> CLambda {
    choose_c_lambda_on(lambda, kit, r0, &c_lambda_samples(geometry), Some(geometry))
}

/// Quintic smoothstep `S(t) = 6t^5 - 15t^4 + 10t^3` with its first two derivatives.
fn smoothstep(t: f64) -> (f64, f64, f64) {
    let t = t.clamp(0.0, 1.0);
    (t * t * t * (10.0 + t * (6.0 * t - 15.0)), 30.0 * t * t * (t - 1.0) * (t - 1.0), 60.0 * t * (2.0 * t - 1.0) * (t - 1.0))
}

/// Carleman weight parameters with `psi`, `r_0` and `C_lambda` fixed.
#[derive(Clone, Debug)]
pub struct WeightConfig {
    kit: PsiKit,
    params: WeightParams,
    k: f64,
    r0: f64,
    r0_choice: Option<RecipeChoice>,
    c_lambda: CLambda,
}

impl WeightConfig {
    pub fn new(kit: PsiKit, params: WeightParams, r0: f64, c_lambda: CLambda) -> Result<Self, WeightsError> {
        let p = &params;
        if !(p.lambda > 0.0) {
            return Err(WeightsError::InvalidConstant(format!("lambda must be positive, got {}", p.lambda)));
        }
        if !(p.s > 0.0) {
            return Err(WeightsError::InvalidConstant(format!("s must be positive, got {}", p.s)));
        }
        if !(p.gamma > 1.0 && p.gamma < 2.0) {
            return Err(WeightsError::InvalidGamma(p.gamma));
        }
        if !(p.horizon > 0.0) {
            return Err(WeightsError::InvalidConstant(format!("horizon must be positive, got {}", p.horizon)));
        }
        let mu_n = (kit.dim() * kit.dim()) as f64 / 4.0;
        if p.mu > mu_n {
            return Err(WeightsError::InvalidConstant(format!("mu = {} exceeds the critical value {mu_n}", p.mu)));
        }
        if !(r0 > 0.0) {
            return Err(WeightsError::InvalidConstant(format!("r0 must be positive, got {r0}")));
        }
        let k = 1.0 + 2.0 / p.gamma;
        Ok(Self { kit, params, k, r0, r0_choice: None, c_lambda })
    }

    /// Selects `r_0` by its recipe (unless overridden) and `C_lambda` by sampling.
    pub fn from_recipes(
        geometry: &DomainGeometry,
        kit: PsiKit,
        params: WeightParams,
        r0_override: Option<f64>,
    ) -> Result<Self, WeightsError> {
        let choice = r0_clauses(&R0Inputs::from_kit(&kit, params.gamma, params.mu, params.c3))?;
        let r0 = r0_override.unwrap_or(choice.value);
        let c = choose_c_lambda(params.lambda, &kit, r0, geometry);
        let mut w = Self::new(kit, params, r0, c)?;
        w.r0_choice = Some(choice);
        Ok(w)
    }

    /// Same configuration at another `lambda`, with `C_lambda` recomputed.
    pub fn with_lambda(&self, lambda: f64, geometry: &DomainGeometry) -> Result<Self, WeightsError> {
        let mut params = self.params.clone();
        params.lambda = lambda;
        let c = choose_c_lambda(lambda, &self.kit, self.r0, geometry);
        let mut w = Self::new(self.kit.clone(), params, self.r0, c)?;
        w.r0_choice = self.r0_choice.clone();
        Ok(w)
    }

    pub fn kit(&self) -> &PsiKit {
        &self.kit
    }

    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    pub fn s(&self) -> f64 {
        self.params.s
    }

    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }

    pub fn horizon(&self) -> f64 {
        self.params.horizon
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn r0_choice(&self) -> Option<&RecipeChoice> {
        self.r0_choice.as_ref()
    }

    pub fn c_lambda(&self) -> CLambda {
        self.c_lambda
    }

    fn window(&self, t: f64) -> Result<(), WeightsError> {
        if t > 0.0 && t < self.params.horizon {
            Ok(())
        } else {
            Err(WeightsError::OutOfWindow { t, horizon: self.params.horizon })
        }
    }

    pub fn theta(&self, t: f64) -> Result<f64, WeightsError> {
        Ok(self.theta_derivatives(t)?.0)
    }

    /// `(theta, theta', theta'')`.
    pub fn theta_derivatives(&self, t: f64) -> Result<(f64, f64, f64), WeightsError> {
        self.window(t)?;
        let k = self.k;
        let u = t * (self.params.horizon - t);
        let du = self.params.horizon - 2.0 * t;
        let th = u.powf(-k);
        let d1 = -k * th * du / u;
        let d2 = k * (k + 1.0) * th * du * du / (u * u) + 2.0 * k * th / u;
        Ok((th, d1, d2))
    }

    /// Cutoff `alpha`: `0` for `|x| <= r0/2`, `1/N` for `|x| >= r0`.
    pub fn alpha(&self, x: &DVector<f64>) -> f64 {
        self.alpha_radial(x.norm()).0
    }

    /// `alpha` and its first two derivatives in `|x|`.
    pub fn alpha_radial(&self, r: f64) -> (f64, f64, f64) {
        let h = 0.5 * self.r0;
        let n = self.kit.dim() as f64;
        let (s, s1, s2) = smoothstep((r - h) / h);
        (s / n, s1 / (h * n), s2 / (h * h * n))
    }

    /// Scaled evaluation of `tau` and its derivatives.
    pub fn tau_jet(&self, x: &DVector<f64>) -> TauJet {
        let n = x.len();
        let lambda = self.params.lambda;
        let psi = self.kit.psi(x);
        let g = &psi.grad;
        let r2 = x.norm_squared();
        let r = r2.sqrt();
        let eye = DMatrix::<f64>::identity(n, n);

        let ln_q = if r > 0.0 {
            lambda.ln() + lambda * psi.value + (lambda - 2.0) * r.ln() - lambda * self.r0.ln()
        } else if lambda > 2.0 {
            f64::NEG_INFINITY
        } else if lambda == 2.0 {
            2f64.ln() + 2.0 * psi.value - 2.0 * self.r0.ln()
        } else {
            f64::INFINITY
        };
        let ln_scale = ln_q.max(0.0);
        let q = if ln_q == f64::INFINITY { 1.0 } else { (ln_q - ln_scale).exp() };

        let xg = x.dot(g);
        let x2 = TauPart {
            value: r2 * psi.value,
            grad: x * (2.0 * psi.value) + g * r2,
            hess: &eye * (2.0 * psi.value) + (x * g.transpose() + g * x.transpose()) * 2.0 + &psi.hess * r2,
            lap: 2.0 * n as f64 * psi.value + 4.0 * xg + r2 * psi.laplacian(),
        };

        let radial = if r > 0.0 { x * x.transpose() * ((lambda - 2.0) / r2) } else { DMatrix::zeros(n, n) };
        let phi = TauPart {
            value: q * r2 / lambda,
            grad: (x + g * r2) * q,
            hess: (&eye + radial + (g * x.transpose() + x * g.transpose()) * lambda + &psi.hess * r2 + g * g.transpose() * (lambda * r2))
                * q,
            lap: q * (n as f64 + lambda - 2.0 + 2.0 * lambda * xg + r2 * psi.laplacian() + lambda * r2 * g.norm_squared()),
        };
        TauJet { ln_scale, ln_q, q, x2, phi, psi }
    }

    pub fn tau_eval(&self, x: &DVector<f64>) -> TauEval {
        self.tau_jet(x).unscaled()
    }

    /// `sigma = theta (C_lambda - tau)` and derivatives, multiplied by `s` when `times_s` is set.
    pub fn sigma_eval(&self, t: f64, x: &DVector<f64>, times_s: bool) -> Result<SigmaEval, WeightsError> {
        let (th, th1, th2) = self.theta_derivatives(t)?;
        let tau = self.tau_eval(x);
        let c = self.c_lambda.value();
        if !c.is_finite() || !tau.tau().is_finite() {
            return Err(WeightsError::Overflow(format!("ln C_lambda = {:.3} is beyond double precision", self.c_lambda.ln_value)));
        }
        let f = if times_s { self.params.s } else { 1.0 };
        let gap = c - tau.tau();
        Ok(SigmaEval {
            sigma: f * th * gap,
            grad: tau.grad() * (-f * th),
            hess: tau.hess() * (-f * th),
            lap: -f * th * tau.lap(),
            dt: f * th1 * gap,
            dtt: f * th2 * gap,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::build_psi;
    use geometry::{Regions, SubsetShape};
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn disk_config() -> &'static (DomainGeometry, WeightConfig) {
        static CELL: OnceLock<(DomainGeometry, WeightConfig)> = OnceLock::new();
        CELL.get_or_init(|| {
            let g = DomainGeometry::tangent_disk(2.0).unwrap();
            let c = DVector::from_vec(vec![0.0, 2.0]);
            let r = Regions::new(&g, SubsetShape::Ball { center: c.clone(), radius: 0.8 }, SubsetShape::Ball { center: c, radius: 0.5 })
                .unwrap();
            let kit = build_psi(&g, &r).unwrap().with_delta(1.0).unwrap();
            let params = WeightParams { lambda: 8.0, s: 1.0, gamma: 1.5, horizon: 1.0, c3: 1.0, mu: 0.5 };
            let w = WeightConfig::from_recipes(&g, kit, params, Some(0.3)).unwrap();
            (g, w)
        })
    }

    #[test]
    fn theta_examples() {
        let (_, w) = disk_config();
        assert!((w.k() - 7.0 / 3.0).abs() < 1e-15);
        assert!((w.theta(0.5).unwrap() - 4f64.powf(7.0 / 3.0)).abs() < 1e-12);
        assert!((w.theta(0.25).unwrap() - w.theta(0.75).unwrap()).abs() < 1e-12);
        assert!(w.theta_derivatives(0.5).unwrap().1.abs() < 1e-12);
        assert!(matches!(w.theta(0.0), Err(WeightsError::OutOfWindow { .. })));
        assert!(matches!(w.theta(1.0), Err(WeightsError::OutOfWindow { .. })));
        let mut prev = w.theta(0.4).unwrap();
        for j in 2..12 {
            let v = w.theta(0.4f64.powi(j)).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn theta_derivatives_match_differences() {
        let (_, w) = disk_config();
        for t in [0.1, 0.3, 0.77] {
            let h = 1e-6;
            let (_, d1, d2) = w.theta_derivatives(t).unwrap();
            let fd1 = (w.theta(t + h).unwrap() - w.theta(t - h).unwrap()) / (2.0 * h);
            let fd2 = (w.theta_derivatives(t + h).unwrap().1 - w.theta_derivatives(t - h).unwrap().1) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-6 * (1.0 + fd1.abs()));
            assert!((d2 - fd2).abs() < 1e-6 * (1.0 + fd2.abs()));
        }
    }

    #[test]
    fn alpha_plateaus_and_joints() {
        let (_, w) = disk_config();
        let r0 = w.r0();
        assert_eq!(w.alpha_radial(r0 / 4.0).0, 0.0);
        assert_eq!(w.alpha_radial(2.0 * r0).0, 0.5);
        for joint in [r0 / 2.0, r0] {
            let h = 1e-8 * r0;
            let fd2 = (w.alpha_radial(joint + h).1 - w.alpha_radial(joint - h).1) / (2.0 * h);
            assert!(fd2.abs() * r0 * r0 < 1e-6, "joint {joint}: {fd2}");
            let jump = w.alpha_radial(joint + 1e-9 * r0).2 - w.alpha_radial(joint - 1e-9 * r0).2;
            assert!(jump.abs() * r0 * r0 < 1e-6);
        }
        let mut prev = 0.0;
        for i in 0..=200 {
            let v = w.alpha_radial(r0 * (0.4 + 0.7 * i as f64 / 200.0)).0;
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn tau_at_origin_uses_limits() {
        let (_, w) = disk_config();
        let x = DVector::zeros(2);
        let t = w.tau_eval(&x);
        assert_eq!(t.grad_x2, DVector::zeros(2));
        assert!((t.lap_x2 - 2.0 * 2.0 * w.kit().delta()).abs() < 1e-12);
        assert_eq!(t.tau_phi, 0.0);
        assert_eq!(t.hess_phi, DMatrix::zeros(2, 2));
    }

    fn fd_tau(w: &WeightConfig, x: &DVector<f64>) {
        let t = w.tau_eval(x);
        let n = x.len();
        let h = 1e-6 * x.norm().max(1e-3);
        for i in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let (tp, tm) = (w.tau_eval(&xp), w.tau_eval(&xm));
            for (fd, an) in [((tp.tau_x2 - tm.tau_x2) / (2.0 * h), t.grad_x2[i]), ((tp.tau_phi - tm.tau_phi) / (2.0 * h), t.grad_phi[i])] {
                assert!((fd - an).abs() <= 1e-6 * (fd.abs() + an.abs()) + 1e-9, "grad at {x}: {fd} vs {an}");
            }
            for k in 0..n {
                for (fd, an) in [
                    ((tp.grad_x2[k] - tm.grad_x2[k]) / (2.0 * h), t.hess_x2[(i, k)]),
                    ((tp.grad_phi[k] - tm.grad_phi[k]) / (2.0 * h), t.hess_phi[(i, k)]),
                ] {
                    let scale = t.hess_x2.norm() + t.hess_phi.norm();
                    assert!((fd - an).abs() <= 1e-6 * scale + 1e-9, "hess at {x}: {fd} vs {an}");
                }
            }
        }
        assert!((t.hess_x2.trace() - t.lap_x2).abs() <= 1e-10 * (1.0 + t.lap_x2.abs()));
        assert!((t.hess_phi.trace() - t.lap_phi).abs() <= 1e-10 * (1.0 + t.lap_phi.abs()));
    }

    #[test]
    fn tau_derivatives_match_differences() {
        let (g, w) = disk_config();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            fd_tau(w, &g.sample_interior(&mut rng));
        }
    }

    #[test]
    fn scaled_jet_is_consistent() {
        let (g, w) = disk_config();
        let big = w.with_lambda(40.0, g).unwrap();
        let x = DVector::from_vec(vec![0.3, 1.9]);
        let j = big.tau_jet(&x);
        assert!(j.ln_scale > 0.0);
        assert!((j.q - 1.0).abs() < 1e-12);
        let e = big.tau_eval(&x);
        let r2 = x.norm_squared();
        assert!((e.tau_phi * 40.0 / r2 - j.ln_q.exp()).abs() < 1e-9 * j.ln_q.exp());
    }

    #[test]
    fn sigma_identity_and_time_symmetry() {
        let (g, w) = disk_config();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let c = w.c_lambda().value();
        for i in 0..100 {
            let x = g.sample_interior(&mut rng);
            let t = 0.01 + 0.98 * i as f64 / 100.0;
            let s = w.sigma_eval(t, &x, false).unwrap();
            let th = w.theta(t).unwrap();
            let tau = w.tau_eval(&x).tau();
            assert!((s.sigma / th + tau - c).abs() <= 1e-12 * c);
            assert!(s.sigma > 0.0);
            assert!(c - tau >= 1.0);
            let h = 1e-6;
            let sp = w.sigma_eval(t, &(&x + DVector::from_vec(vec![h, 0.0])), false).unwrap().sigma;
            let sm = w.sigma_eval(t, &(&x - DVector::from_vec(vec![h, 0.0])), false).unwrap().sigma;
            let fd = (sp - sm) / (2.0 * h);
            let roundoff = 1e-15 * th * c / h;
            assert!((fd - s.grad[0]).abs() <= 1e-6 * (fd.abs() + s.grad.norm()) + roundoff);
        }
        assert!(w.sigma_eval(0.5, &DVector::from_vec(vec![0.1, 1.0]), false).unwrap().dt.abs() < 1e-9);
        let scaled = w.sigma_eval(0.3, &DVector::from_vec(vec![0.1, 1.0]), true).unwrap();
        let plain = w.sigma_eval(0.3, &DVector::from_vec(vec![0.1, 1.0]), false).unwrap();
        assert!((scaled.sigma - w.s() * plain.sigma).abs() < 1e-12 * scaled.sigma.abs());
    }

    #[test]
    fn c_lambda_constant_psi_closed_form() {
        let g = DomainGeometry::interval(1.0).unwrap();
        let psi = crate::psi::ConstantPsi { dim: 1, value: 2.0 };
        let c = choose_c_lambda_on(2.0, &psi, 0.5, &c_lambda_samples(&g), Some(&g));
        let expected = 1.05 * (2.0 + 4.0 * 4f64.exp()) + 1.0;
        assert!((c.value() - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn c_lambda_inside_small_ball_is_bounded() {
        let g = DomainGeometry::interval(0.1).unwrap();
        let psi = crate::psi::ConstantPsi { dim: 1, value: 1.5 };
        let r0 = 0.2;
        for lambda in [2.0, 6.0, 12.0] {
            let c = choose_c_lambda_on(lambda, &psi, r0, &c_lambda_samples(&g), Some(&g)).value();
            assert!(c <= 1.05 * (r0 * r0 * 1.5 + (lambda * 1.5f64).exp()) + 1.0);
        }
    }

    #[test]
    fn c_lambda_grows_with_lambda() {
        let (g, w) = disk_config();
        let mut prev = f64::NEG_INFINITY;
        for l in [6.0, 8.0, 12.0, 16.0] {
            let c = choose_c_lambda(l, w.kit(), w.r0(), g).ln_value;
            assert!(c > prev);
            prev = c;
        }
    }

    proptest! {
        #[test]
        fn split_identities_and_trace(a in 0.0f64..std::f64::consts::PI, r in 0.01f64..3.9) {
            let (g, w) = disk_config();
            let x = DVector::from_vec(vec![r * a.cos(), r * a.sin()]);
            prop_assume!(g.contains_open(&x));
            let j = w.tau_jet(&x);
            let tot = j.total();
            let inv = (-j.ln_scale).exp();
            prop_assert!((tot.grad.clone() - (&j.x2.grad * inv + &j.phi.grad)).norm() <= 1e-12 * (1.0 + tot.grad.norm()));
            prop_assert!((tot.lap - tot.hess.trace()).abs() <= 1e-10 * (1.0 + tot.lap.abs()));
            let mut sum = 0.0;
            for i in 0..2 {
                let e = DVector::from_fn(2, |k, _| if k == i { 1.0 } else { 0.0 });
                sum += (e.transpose() * &tot.hess * &e)[0];
            }
            prop_assert!((sum - tot.lap).abs() <= 1e-10 * (1.0 + tot.lap.abs()));
        }
    }
}
