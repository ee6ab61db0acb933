use linalg::CsrMatrix;
use pde::Discretization;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::HardyError;

/// Relative margin below which a sample counts as a violation.
pub const RELATIVE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Inequality {
    /// `int u^2/|x|^gamma + mu int u^2/|x|^2 <= int |grad u|^2 + c1 int u^2`.
    GammaHardy { c1: f64 },
    /// `c2 int u^2 + int (|grad u|^2 - mu u^2/|x|^2) >= c3 int (|x|^{2-gamma} |grad u|^2 + u^2/|x|^gamma)`.
    WeightedCoercivity { c2: f64, c3: f64 },
    /// Both sides of the equivalence between `B(u) = int |grad u|^2 - mu u^2/|x|^2 + c0 u^2`
    /// and `int |grad u|^2 + c0 u^2`, with factors `1 - mu+/mu_N` and `1 + mu-/mu_N`.
    NormEquivalence { c0: f64 },
}

impl Inequality {
    pub fn id(&self) -> &'static str {
        match self {
            Inequality::GammaHardy { .. } => "gamma_hardy",
            Inequality::WeightedCoercivity { .. } => "weighted_coercivity",
            Inequality::NormEquivalence { .. } => "norm_equivalence",
        }
    }
}

/// Quadratic forms of one discrete field.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Forms {
    /// `int |grad u|^2`
    pub grad: f64,
    /// `int u^2`
    pub l2: f64,
    /// `int u^2 / |x|^2`
    pub inv_sq: f64,
    /// `int u^2 / |x|^gamma`
    pub inv_gamma: f64,
    /// `int |x|^{2-gamma} |grad u|^2`
    pub weighted_grad: f64,
}

/// One side-by-side comparison `lhs <= rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    pub chain: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl Comparison {
    /// `(rhs - lhs) / (|lhs| + |rhs|)`, zero when both sides vanish.
    pub fn relative_margin(&self) -> f64 {
        let scale = self.lhs.abs() + self.rhs.abs();
        if scale == 0.0 {
            0.0
        } else {
            (self.rhs - self.lhs) / scale
        }
    }
}

/// Precomputed operators for a mesh, weight exponent `gamma` and potential strength `mu`.
pub struct InequalityContext<'a> {
    disc: &'a Discretization,
    gamma: f64,
    mu: f64,
    w2: Vec<f64>,
    w_gamma: Vec<f64>,
    k_weighted: CsrMatrix,
}

impl<'a> InequalityContext<'a> {
    pub fn new(disc: &'a Discretization, gamma: f64, mu: f64) -> Result<Self, HardyError> {
        if !(0.0..2.0).contains(&gamma) {
            return Err(HardyError::InvalidParameter(format!("gamma must lie in [0, 2), got {gamma}")));
        }
        if !mu.is_finite() {
            return Err(HardyError::InvalidParameter(format!("mu must be finite, got {mu}")));
        }
        Ok(Self {
            disc,
            gamma,
            mu,
            w2: disc.weighted_mass(2.0),
            w_gamma: disc.weighted_mass(gamma),
            k_weighted: disc.weighted_stiffness(2.0 - gamma),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn forms(&self, u: &[f64]) -> Forms {
        let wsum = |w: &[f64]| w.iter().zip(u).map(|(w, v)| w * v * v).sum::<f64>();
        Forms {
            grad: self.disc.stiffness().quadratic_form(u),
            l2: wsum(self.disc.mass()),
            inv_sq: wsum(&self.w2),
            inv_gamma: wsum(&self.w_gamma),
            weighted_grad: self.k_weighted.quadratic_form(u),
        }
    }

    pub fn compare(&self, ineq: Inequality, f: &Forms) -> Vec<Comparison> {
        let mu = self.mu;
        match ineq {
            Inequality::GammaHardy { c1 } => {
                vec![Comparison { chain: "single", lhs: f.inv_gamma + mu * f.inv_sq, rhs: f.grad + c1 * f.l2 }]
            }
            Inequality::WeightedCoercivity { c2, c3 } => {
                vec![Comparison { chain: "single", lhs: c3 * (f.weighted_grad + f.inv_gamma), rhs: c2 * f.l2 + f.grad - mu * f.inv_sq }]
            }
            Inequality::NormEquivalence { c0 } => {
                let mu_n = self.disc.critical_mu();
                let b = f.grad - mu * f.inv_sq + c0 * f.l2;
                let h1 = f.grad + c0 * f.l2;
                let (plus, minus) = (mu.max(0.0), (-mu).max(0.0));
                vec![
                    Comparison { chain: "lower", lhs: (1.0 - plus / mu_n) * h1 + plus / mu_n * f.inv_gamma, rhs: b },
                    Comparison { chain: "upper", lhs: b, rhs: (1.0 + minus / mu_n) * h1 },
                ]
            }
        }
    }
}

/// Standard Gaussian nodal values at the free nodes (Dirichlet nodes are zero by construction).
pub fn gaussian_field(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct InequalityReport {
    pub id: &'static str,
    pub inequality: Inequality,
    pub gamma: f64,
    pub mu: f64,
    pub fields: usize,
    pub violations: usize,
    pub worst_margin: f64,
    pub worst_seed: Option<u64>,
    pub worst_chain: Option<&'static str>,
}

impl InequalityReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// Evaluates the inequality on `fields` Gaussian samples with seeds `base_seed + k`.
pub fn check_inequality(ctx: &InequalityContext, ineq: Inequality, fields: usize, base_seed: u64) -> InequalityReport {
    let mut report = InequalityReport {
        id: ineq.id(),
        inequality: ineq,
        gamma: ctx.gamma,
        mu: ctx.mu,
        fields,
        violations: 0,
        worst_margin: f64::INFINITY,
        worst_seed: None,
        worst_chain: None,
    };
    for k in 0..fields {
        let seed = base_seed.wrapping_add(k as u64);
        let u = gaussian_field(ctx.disc.len(), seed);
        let forms = ctx.forms(&u);
        let mut violated = false;
        for cmp in ctx.compare(ineq, &forms) {
            let m = cmp.relative_margin();
            violated |= m < -RELATIVE_TOL;
            if m < report.worst_margin {
                report.worst_margin = m;
                report.worst_seed = Some(seed);
                report.worst_chain = Some(cmp.chain);
            }
        }
        report.violations += usize::from(violated);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use pde::Mesh;

    fn interval(cells: usize) -> Discretization {
        Discretization::new(Mesh::interval(1.0, cells).unwrap()).unwrap()
    }

    #[test]
    fn zero_field_is_equality() {
        let disc = interval(32);
        let ctx = InequalityContext::new(&disc, 1.5, 0.25).unwrap();
        let f = ctx.forms(&vec![0.0; disc.len()]);
        for ineq in [
            Inequality::GammaHardy { c1: 1.0 },
            Inequality::WeightedCoercivity { c2: 1.0, c3: 0.1 },
            Inequality::NormEquivalence { c0: 1.0 },
        ] {
            for c in ctx.compare(ineq, &f) {
                assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
                assert_eq!(c.relative_margin(), 0.0);
            }
        }
    }

    #[test]
    fn fields_are_reproducible() {
        assert_eq!(gaussian_field(10, 7), gaussian_field(10, 7));
        assert_ne!(gaussian_field(10, 7), gaussian_field(10, 8));
    }

    #[test]
    fn hopeless_constant_is_caught_with_its_seed() {
        let disc = interval(64);
        let ctx = InequalityContext::new(&disc, 1.5, 0.25).unwrap();
        // c3 so large that the weighted side wins for every field.
        let r = check_inequality(&ctx, Inequality::WeightedCoercivity { c2: 0.0, c3: 1e3 }, 20, 5);
        assert_eq!(r.violations, 20);
        assert!(r.worst_seed.unwrap() >= 5 && r.worst_seed.unwrap() < 25);
        assert!(!r.pass());
    }

    #[test]
    fn forms_match_direct_quadrature_in_one_dimension() {
        let disc = interval(8);
        let ctx = InequalityContext::new(&disc, 1.0, 0.0).unwrap();
        let u: Vec<f64> = (1..=7).map(|i| i as f64).collect();
        let f = ctx.forms(&u);
        let h = 0.125;
        let mut full = vec![0.0];
        full.extend(&u);
        full.push(0.0);
        let grad: f64 = full.windows(2).map(|w| (w[1] - w[0]).powi(2) / h).sum();
        let inv_gamma: f64 = u.iter().enumerate().map(|(i, v)| h * v * v / ((i + 1) as f64 * h)).sum();
        let wgrad: f64 = full.windows(2).enumerate().map(|(i, w)| (i as f64 + 0.5) * h * (w[1] - w[0]).powi(2) / h).sum();
        assert!((f.grad - grad).abs() < 1e-12 * grad);
        assert!((f.inv_gamma - inv_gamma).abs() < 1e-12 * inv_gamma);
        assert!((f.weighted_grad - wgrad).abs() < 1e-12 * wgrad);
    }
}
