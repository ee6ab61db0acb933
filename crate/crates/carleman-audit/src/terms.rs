use nalgebra::{DMatrix, DVector};
use weights::{TauJet, WeightConfig};

/// The splitting `2 D^2tau(grad tau, grad tau) - alpha Delta tau |grad tau|^2 = T1 + T2 + T3`
/// at one point.
///
/// Every field ending in `_s` is divided by `s^3` (or `s^2` for `grad2_s`),
/// where `s = exp(ln_scale)` is the scale of the `tau` jet. The ratios are
/// scale free.
#[derive(Clone, Debug, PartialEq)]
pub struct TTerms {
    pub ln_scale: f64,
    /// `q / s`.
    pub q_s: f64,
    pub alpha: f64,
    pub lhs_s: f64,
    pub t1_s: f64,
    pub t2_s: f64,
    pub t3_s: f64,
    /// `|grad tau|^2 / s^2`.
    pub grad2_s: f64,
    /// `T1 / |grad tau|^2`.
    pub t1_ratio: f64,
    /// `T3 / (lambda q |grad tau|^2)`.
    pub t3_ratio: f64,
}

impl TTerms {
    /// `|LHS - (T1 + T2 + T3)| / (1 + |LHS|)` in unscaled units.
    pub fn identity_residual(&self) -> f64 {
        let res = (self.lhs_s - (self.t1_s + self.t2_s + self.t3_s)).abs();
        res / ((-3.0 * self.ln_scale).exp() + self.lhs_s.abs())
    }
}

fn quad(m: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(m * v))
}

/// Evaluates the splitting at `x` from an already computed jet.
pub fn t_terms_from_jet(w: &WeightConfig, jet: &TauJet, x: &DVector<f64>) -> TTerms {
    let lambda = w.lambda();
    let n = x.len() as f64;
    let alpha = w.alpha(x);
    let inv_s = (-jet.ln_scale).exp();
    let q = jet.q;
    let psi = &jet.psi;
    let p = psi.value;
    let g = &psi.grad;
    let lap_psi = psi.laplacian();
    let r2 = x.norm_squared();
    let gx = g.dot(x);
    let g2 = g.norm_squared();

    let total = jet.total();
    let grad = &total.grad;
    let grad2 = grad.norm_squared();
    let lhs = 2.0 * quad(&total.hess, grad) - alpha * total.lap * grad2;

    let h_unit = if grad2 > 0.0 { quad(&psi.hess, grad) / grad2 } else { 0.0 };

    let c1 = 2.0 * p * (2.0 - alpha * n) + 4.0 * (2.0 - alpha) * gx - alpha * r2 * lap_psi;
    let t1_ratio = c1 + 2.0 * r2 * h_unit;
    let t1 = t1_ratio * grad2 * inv_s;

    // |x|^2 |g|^2 - (x.g)^2 through Lagrange's identity, free of cancellation.
    let mut cs = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            cs += (x[i] * g[j] - x[j] * g[i]).powi(2);
        }
    }
    let bracket = 8.0 * (inv_s + q) * (2.0 * p * inv_s + q) * inv_s
        + 4.0 * q * q * q
        + 8.0 * q * q * inv_s
        + 8.0 * lambda * q * p * (1.0 - p) * inv_s * inv_s
        - 2.0 * (lambda - 2.0) * q * inv_s * inv_s;
    let t2 = cs * r2 * bracket;

    let a = (2.0 - alpha) * lambda * lambda - lambda * (2.0 + alpha * n - 2.0 * alpha);
    let b = a + 2.0 * lambda * lambda * (2.0 - alpha) * gx - alpha * lambda * r2 * lap_psi + (2.0 - alpha) * lambda * lambda * r2 * g2;
    let t3_ratio = (b + 2.0 * lambda * r2 * h_unit) / (lambda * lambda);
    let t3 = lambda * q * t3_ratio * grad2;

    TTerms { ln_scale: jet.ln_scale, q_s: q, alpha, lhs_s: lhs, t1_s: t1, t2_s: t2, t3_s: t3, grad2_s: grad2, t1_ratio, t3_ratio }
}

pub fn t_terms(w: &WeightConfig, x: &DVector<f64>) -> TTerms {
    let jet = w.tau_jet(x);
    t_terms_from_jet(w, &jet, x)
}
