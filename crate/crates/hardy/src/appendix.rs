use geometry::DomainGeometry;
use nalgebra::DVector;

use crate::HardyError;

/// Angles (from the tangent line) at which two-dimensional samples are placed, used cyclically.
pub const SAMPLE_ANGLES: [f64; 5] = [
    std::f64::consts::FRAC_PI_2,
    std::f64::consts::FRAC_PI_3,
    2.0 * std::f64::consts::FRAC_PI_3,
    std::f64::consts::FRAC_PI_4,
    3.0 * std::f64::consts::FRAC_PI_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiCheckOptions {
    /// Largest sample radius; defaults to `0.05 R_Omega`.
    pub r1: Option<f64>,
    pub samples: usize,
    /// Radii run from `r1` down to `r1 2^-octaves`.
    pub octaves: f64,
    /// Finite-difference step as a fraction of `|x|`.
    pub step_fraction: f64,
    /// Replace the distance factor by one (negative control).
    pub suppress_distance: bool,
}

impl Default for PhiCheckOptions {
    fn default() -> Self {
        Self { r1: None, samples: 200, octaves: 30.0, step_fraction: 1e-2, suppress_distance: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiSample {
    pub point: Vec<f64>,
    pub radius: f64,
    pub phi: f64,
    pub laplacian: f64,
    /// `-Delta phi - (N^2/4) phi / |x|^2`.
    pub margin: f64,
    /// `P |x|^2` with `P = -Delta phi / phi - N^2 / (4 |x|^2)`.
    pub scaled_remainder: f64,
    pub step: f64,
    pub retried: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiReport {
    pub dim: usize,
    pub r1: f64,
    pub samples: Vec<PhiSample>,
    pub failures: usize,
    /// Mean of `P |x|^2 (log 1/|x|)^2`, the constant of the `c / (|x|^2 log^2)` remainder profile.
    pub fitted_constant: f64,
}

impl PhiReport {
    pub fn pass(&self) -> bool {
        self.failures == 0 && !self.samples.is_empty()
    }

    pub fn min_margin(&self) -> f64 {
        self.samples.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min)
    }
}

struct Phi<'a> {
    geometry: &'a DomainGeometry,
    dim: usize,
    suppress_distance: bool,
}

impl Phi<'_> {
    fn eval(&self, x: &[f64]) -> Result<f64, HardyError> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rho = if self.suppress_distance { 1.0 } else { self.geometry.distance_to_boundary(&DVector::from_column_slice(x))? };
        let n = self.dim as f64;
        Ok(rho * ((1.0 - n) * rho).exp() * (1.0 / r).ln().sqrt() * r.powf(-0.5 * n))
    }

    /// Central second differences summed over coordinates.
    fn laplacian(&self, x: &[f64], h: f64) -> Result<f64, HardyError> {
        let centre = self.eval(x)?;
        let mut total = 0.0;
        let mut y = x.to_vec();
        for i in 0..x.len() {
            y[i] = x[i] + h;
            let plus = self.eval(&y)?;
            y[i] = x[i] - h;
            let minus = self.eval(&y)?;
            y[i] = x[i];
            total += (plus - 2.0 * centre + minus) / (h * h);
        }
        Ok(total)
    }
}

/// Sample location at radius `r`: `x = r` in one dimension; `r (cos a, sin a)` with `a` cycling
/// through [`SAMPLE_ANGLES`] in two, measured from the tangent line into the domain.
pub fn sample_point(dim: usize, r: f64, index: usize) -> Vec<f64> {
    if dim == 1 {
        vec![r]
    } else {
        let a = SAMPLE_ANGLES[index % SAMPLE_ANGLES.len()];
        vec![r * a.cos(), r * a.sin()]
    }
}

/// Checks `-Delta phi >= (N^2/4) phi / |x|^2` for `phi = rho e^{(1-N) rho} (log 1/|x|)^{1/2} |x|^{-N/2}`
/// at log-spaced radii below `r1`. A negative margin is retried once with a tenfold smaller step.
pub fn appendix_phi_check(geometry: &DomainGeometry, opts: PhiCheckOptions) -> Result<PhiReport, HardyError> {
    let dim = geometry.dim();
    if dim > 2 {
        return Err(HardyError::InvalidParameter(format!("supersolution check supports N <= 2, got {dim}")));
    }
    let r1 = opts.r1.unwrap_or(0.05 * geometry.r_omega());
    if !(r1 > 0.0 && r1 < 1.0) {
        return Err(HardyError::InvalidParameter(format!("need 0 < r1 < 1 so that log(1/|x|) > 0, got {r1}")));
    }
    if opts.samples < 2 || !(opts.step_fraction > 0.0 && opts.step_fraction < 0.5) || !(opts.octaves > 0.0) {
        return Err(HardyError::InvalidParameter("need at least two samples, 0 < step fraction < 1/2 and positive octaves".into()));
    }
    let phi = Phi { geometry, dim, suppress_distance: opts.suppress_distance };
    let quarter_n2 = (dim * dim) as f64 / 4.0;
    let mut samples = Vec::with_capacity(opts.samples);
    let mut failures = 0;
    let mut fit_sum = 0.0;
    for j in 0..opts.samples {
        let r = r1 * (-opts.octaves * j as f64 / (opts.samples - 1) as f64).exp2();
        let x = sample_point(dim, r, j);
        let value = phi.eval(&x)?;
        let mut step = opts.step_fraction * r;
        let mut lap = phi.laplacian(&x, step)?;
        let mut retried = false;
        if -lap - quarter_n2 * value / (r * r) < 0.0 {
            step /= 10.0;
            lap = phi.laplacian(&x, step)?;
            retried = true;
        }
        let margin = -lap - quarter_n2 * value / (r * r);
        if !(margin >= 0.0) {
            failures += 1;
        }
        let scaled = -lap / value * r * r - quarter_n2;
        fit_sum += scaled * (1.0 / r).ln().powi(2);
        samples.push(PhiSample { point: x, radius: r, phi: value, laplacian: lap, margin, scaled_remainder: scaled, step, retried });
    }
    Ok(PhiReport { dim, r1, fitted_constant: fit_sum / opts.samples as f64, samples, failures })
}
