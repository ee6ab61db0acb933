use nalgebra::{DMatrix, DVector};

/// Even polynomial `F(r) = sum_k c_k r^(2k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvenPoly {
    coeffs: Vec<f64>,
}

fn falling(m: usize, n: usize) -> f64 {
    (0..n).map(|i| (m as f64) - i as f64).product()
}

impl EvenPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `n`-th derivative at `r`.
    pub fn derivative(&self, r: f64, n: usize) -> f64 {
        self.coeffs.iter().enumerate().filter(|(k, _)| 2 * k >= n).map(|(k, c)| c * falling(2 * k, n) * r.powi((2 * k - n) as i32)).sum()
    }

    pub fn value(&self, r: f64) -> f64 {
        self.derivative(r, 0)
    }

    /// `F'(r) / r`, smooth at `r = 0`.
    pub fn slope_over_r(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.coeffs.iter().enumerate().skip(1).map(|(k, c)| 2.0 * k as f64 * c * r2.powi(k as i32 - 1)).sum()
    }

    /// `(F''(r) - F'(r)/r) / r^2`, smooth at `r = 0`.
    pub fn curvature_excess(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.coeffs.iter().enumerate().skip(2).map(|(k, c)| 4.0 * (k * (k - 1)) as f64 * c * r2.powi(k as i32 - 2)).sum()
    }

    /// Fits the coefficients listed in `free` so that `F(rc) = beta`,
    /// `F'(rc) = -1` and `F'' = F''' = F'''' = 0` at `rc`; the remaining
    /// coefficients are taken from `fixed`.
    pub fn fit_collar(fixed: &[f64], free: &[usize], rc: f64, beta: f64) -> Option<Self> {
        assert_eq!(free.len(), 5);
        let degree = fixed.len().max(free.iter().max().map_or(0, |m| m + 1));
        let mut scaled: Vec<f64> = (0..degree).map(|k| fixed.get(k).copied().unwrap_or(0.0) * rc.powi(2 * k as i32)).collect();
        for &k in free {
            scaled[k] = 0.0;
        }
        let target = [beta, -rc, 0.0, 0.0, 0.0];
        let known = EvenPoly::new(scaled.clone());
        let a = DMatrix::from_fn(5, 5, |n, j| falling(2 * free[j], n));
        let b = DVector::from_fn(5, |n, _| target[n] - known.derivative(1.0, n));
        let g = a.lu().solve(&b)?;
        for (j, &k) in free.iter().enumerate() {
            scaled[k] = g[j];
        }
        let coeffs = scaled.iter().enumerate().map(|(k, c)| c / rc.powi(2 * k as i32)).collect();
        Some(Self::new(coeffs))
    }
}
