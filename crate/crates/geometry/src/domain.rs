use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::cubic::depressed_cubic_roots;
use crate::GeometryError;

/// Padding applied to every sampled supremum.
pub const SAFETY_FACTOR: f64 = 1.1;

const TANGENCY_SAMPLES: usize = 10_000;
const TIE_GRID: usize = 240;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// `(0, L)`.
    Interval { length: f64 },
    /// Disk of radius `R` centred at `(0, R)`.
    TangentDisk { radius: f64 },
    /// `{x_2 >= beta x_1^2, |x| <= r_1}`.
    ParabolaCap { curvature: f64, cap_radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    Interval,
    TangentDisk,
    ParabolaCap,
}

#[derive(Clone, Debug)]
struct Candidate {
    point: DVector<f64>,
    dist: f64,
}

#[derive(Clone, Debug)]
pub struct DomainGeometry {
    shape: Shape,
    r_omega: f64,
    beta0: f64,
    tangency_sup: f64,
    growth_sup: f64,
}

impl DomainGeometry {
    pub fn interval(length: f64) -> Result<Self, GeometryError> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!("interval length must be positive, got {length}")));
        }
        Ok(Self::finish(Shape::Interval { length }))
    }

    pub fn tangent_disk(radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Self::finish(Shape::TangentDisk { radius }))
    }

    pub fn parabola_cap(curvature: f64, cap_radius: f64) -> Result<Self, GeometryError> {
        if !(cap_radius > 0.0 && cap_radius.is_finite() && curvature.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!(
                "parabola cap needs finite curvature and positive radius, got ({curvature}, {cap_radius})"
            )));
        }
        Ok(Self::finish(Shape::ParabolaCap { curvature, cap_radius }))
    }

    pub fn from_shape(shape: Shape) -> Result<Self, GeometryError> {
        match shape {
            Shape::Interval { length } => Self::interval(length),
            Shape::TangentDisk { radius } => Self::tangent_disk(radius),
            Shape::ParabolaCap { curvature, cap_radius } => Self::parabola_cap(curvature, cap_radius),
        }
    }

    fn finish(shape: Shape) -> Self {
        let r_omega = match shape {
            Shape::Interval { length } => length,
            Shape::TangentDisk { radius } => 2.0 * radius,
            Shape::ParabolaCap { cap_radius, .. } => cap_radius,
        };
        let mut g = Self { shape, r_omega, beta0: 0.0, tangency_sup: 0.0, growth_sup: 0.0 };
        g.beta0 = match shape {
            Shape::Interval { length } => length / 2.0,
            Shape::TangentDisk { radius } => radius / 2.0,
            Shape::ParabolaCap { cap_radius, .. } => g.cap_unique_collar(cap_radius),
        };
        g.tangency_sup = g.sample_tangency();
        g.growth_sup = g.sample_growth();
        g
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn kind(&self) -> DomainKind {
        match self.shape {
            Shape::Interval { .. } => DomainKind::Interval,
            Shape::TangentDisk { .. } => DomainKind::TangentDisk,
            Shape::ParabolaCap { .. } => DomainKind::ParabolaCap,
        }
    }

    pub fn dim(&self) -> usize {
        match self.shape {
            Shape::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// `R_Omega = sup |x|` over the closure.
    pub fn r_omega(&self) -> f64 {
        self.r_omega
    }

    /// Collar width below which the boundary projection is unique.
    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    /// Padded tangency constant `C_Omega` with `|x.n| <= C_Omega |x|^2` on the boundary.
    pub fn tangency_constant(&self) -> f64 {
        SAFETY_FACTOR * self.tangency_sup
    }

    /// Unpadded sampled supremum of `|x.n| / |x|^2`.
    pub fn tangency_sup(&self) -> f64 {
        self.tangency_sup
    }

    /// Padded projection growth constant `E_Omega` with `|pr(x)| <= E_Omega |x|` in the collar.
    pub fn projection_growth_constant(&self) -> f64 {
        SAFETY_FACTOR * self.growth_sup
    }

    pub fn projection_growth_sup(&self) -> f64 {
        self.growth_sup
    }

    fn scale(&self) -> f64 {
        self.r_omega
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<(), GeometryError> {
        if x.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// Disk centre `R e_N` (tangent disk only).
    pub fn disk_center(&self) -> Option<DVector<f64>> {
        match self.shape {
            Shape::TangentDisk { radius } => Some(DVector::from_vec(vec![0.0, radius])),
            _ => None,
        }
    }

    /// Membership in the closed domain, with a relative tolerance of `1e-12`.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let tol = 1e-12 * self.scale();
        match self.shape {
            Shape::Interval { length } => x[0] >= -tol && x[0] <= length + tol,
            Shape::TangentDisk { radius } => {
                let d = (x[0] * x[0] + (x[1] - radius).powi(2)).sqrt();
                d <= radius + tol
            }
            Shape::ParabolaCap { curvature, cap_radius } => x[1] >= curvature * x[0] * x[0] - tol && x.norm() <= cap_radius + tol,
        }
    }

    /// Strict interior membership.
    pub fn contains_open(&self, x: &DVector<f64>) -> bool {
        self.contains(x) && self.nearest(x).dist > 1e-12 * self.scale()
    }

    /// Exact strict interior test without tolerance, usable at any distance from the origin.
    pub fn strictly_inside(&self, x: &DVector<f64>) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self.shape {
            Shape::Interval { length } => x[0] > 0.0 && x[0] < length,
            Shape::TangentDisk { radius } => 2.0 * radius * x[1] - x.norm_squared() > 0.0,
            Shape::ParabolaCap { curvature, cap_radius } => x[1] > curvature * x[0] * x[0] && x.norm() < cap_radius,
        }
    }

    /// Parabola parameter of the cap corners, `a_c > 0`.
    fn cap_corner(&self) -> f64 {
        match self.shape {
            Shape::ParabolaCap { curvature: b, cap_radius: r } => {
                if b == 0.0 {
                    r
                } else {
                    (((1.0 + 4.0 * b * b * r * r).sqrt() - 1.0) / (2.0 * b * b)).sqrt()
                }
            }
            _ => 0.0,
        }
    }

    fn candidates(&self, x: &DVector<f64>) -> Vec<Candidate> {
        match self.shape {
            Shape::Interval { length } => vec![
                Candidate { point: DVector::from_element(1, 0.0), dist: x[0].abs() },
                Candidate { point: DVector::from_element(1, length), dist: (length - x[0]).abs() },
            ],
            Shape::TangentDisk { radius } => {
                let c = DVector::from_vec(vec![0.0, radius]);
                let v = x - &c;
                let r = v.norm();
                let point = if r > 0.0 { &c + v * (radius / r) } else { DVector::from_vec(vec![0.0, 0.0]) };
                let dist = (2.0 * radius * x[1] - x.norm_squared()).abs() / (radius + r);
                vec![Candidate { point, dist }]
            }
            Shape::ParabolaCap { curvature: b, cap_radius: r1 } => {
                let ac = self.cap_corner();
                let mut out = Vec::new();
                let para = |a: f64| DVector::from_vec(vec![a, b * a * a]);
                let mut params: Vec<f64> = if b == 0.0 {
                    vec![x[0]]
                } else {
                    let p = (1.0 - 2.0 * b * x[1]) / (2.0 * b * b);
                    let q = -x[0] / (2.0 * b * b);
                    depressed_cubic_roots(p, q)
                };
                params.retain(|a| a.abs() < ac);
                for a in params {
                    let pt = para(a);
                    out.push(Candidate { dist: (x - &pt).norm(), point: pt });
                }
                for s in [-1.0, 1.0] {
                    let pt = para(s * ac);
                    out.push(Candidate { dist: (x - &pt).norm(), point: pt });
                }
                let nx = x.norm();
                if nx > 0.0 {
                    let pt = x * (r1 / nx);
                    if pt[1] >= b * pt[0] * pt[0] {
                        out.push(Candidate { dist: (r1 - nx).abs(), point: pt });
                    }
                }
                out.sort_by(|a, b| a.dist.total_cmp(&b.dist));
                out
            }
        }
    }

    fn nearest(&self, x: &DVector<f64>) -> Candidate {
        self.candidates(x).into_iter().min_by(|a, b| a.dist.total_cmp(&b.dist)).expect("every shape has boundary candidates")
    }

    /// Distance `rho(x)` to the boundary.
    pub fn distance_to_boundary(&self, x: &DVector<f64>) -> Result<f64, GeometryError> {
        self.check_dim(x)?;
        if !self.contains(x) {
            return Err(GeometryError::OutsideDomain { point: x.iter().copied().collect() });
        }
        Ok(self.nearest(x).dist)
    }

    /// Nearest boundary point `pr(x)`, defined for `rho(x) < beta0`.
    pub fn project_to_boundary(&self, x: &DVector<f64>) -> Result<DVector<f64>, GeometryError> {
        let rho = self.distance_to_boundary(x)?;
        if rho >= self.beta0 {
            return Err(GeometryError::NonUniqueProjection { point: x.iter().copied().collect(), distance: rho, beta0: self.beta0 });
        }
        Ok(self.nearest(x).point)
    }

    /// Distance from `p` to the boundary curve, valid slightly outside the domain.
    fn boundary_residual(&self, p: &DVector<f64>) -> f64 {
        match self.shape {
            Shape::Interval { length } => p[0].abs().min((p[0] - length).abs()),
            Shape::TangentDisk { radius } => ((p[0] * p[0] + (p[1] - radius).powi(2)).sqrt() - radius).abs(),
            Shape::ParabolaCap { curvature: b, cap_radius: r1 } => {
                let tol = 1e-9 * r1;
                let mut best = f64::INFINITY;
                if p.norm() <= r1 + tol {
                    best = best.min((p[1] - b * p[0] * p[0]).abs() / (1.0 + 4.0 * b * b * p[0] * p[0]).sqrt());
                }
                if p[1] >= b * p[0] * p[0] - tol {
                    best = best.min((p.norm() - r1).abs());
                }
                best
            }
        }
    }

    /// Outward unit normal at a boundary point; `-e_N` at the origin.
    pub fn outward_normal(&self, p: &DVector<f64>) -> Result<DVector<f64>, GeometryError> {
        self.check_dim(p)?;
        let res = self.boundary_residual(p);
        if res > 1e-9 * self.scale() {
            return Err(GeometryError::NotOnBoundary { point: p.iter().copied().collect(), distance: res });
        }
        Ok(match self.shape {
            Shape::Interval { length } => {
                let s = if p[0].abs() <= (p[0] - length).abs() { -1.0 } else { 1.0 };
                DVector::from_element(1, s)
            }
            Shape::TangentDisk { radius } => {
                let c = DVector::from_vec(vec![0.0, radius]);
                (p - c) / radius
            }
            Shape::ParabolaCap { curvature: b, cap_radius: r1 } => {
                let on_parabola = (p[1] - b * p[0] * p[0]).abs() <= 1e-9 * r1 && p[0].abs() <= self.cap_corner() * (1.0 + 1e-12);
                if on_parabola {
                    let a = p[0];
                    DVector::from_vec(vec![2.0 * b * a, -1.0]) / (1.0 + 4.0 * b * b * a * a).sqrt()
                } else {
                    p / p.norm()
                }
            }
        })
    }

    /// `grad rho(x) = -n(pr(x))` inside the collar.
    pub fn distance_gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>, GeometryError> {
        let p = self.project_to_boundary(x)?;
        Ok(-self.outward_normal(&p)?)
    }

    /// Hessian of `rho` inside the collar (interval and disk only).
    pub fn distance_hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        match self.shape {
            Shape::Interval { .. } => Some(DMatrix::zeros(1, 1)),
            Shape::TangentDisk { radius } => {
                let v = DVector::from_vec(vec![x[0], x[1] - radius]);
                let r = v.norm();
                if r == 0.0 {
                    return None;
                }
                let u = v / r;
                Some(-(DMatrix::identity(2, 2) - &u * u.transpose()) / r)
            }
            Shape::ParabolaCap { .. } => None,
        }
    }

    /// Axis-aligned bounding box `(lo, hi)` of the closure.
    pub fn bounding_box(&self) -> (DVector<f64>, DVector<f64>) {
        match self.shape {
            Shape::Interval { length } => (DVector::from_element(1, 0.0), DVector::from_element(1, length)),
            Shape::TangentDisk { radius } => (DVector::from_vec(vec![-radius, 0.0]), DVector::from_vec(vec![radius, 2.0 * radius])),
            Shape::ParabolaCap { curvature: b, cap_radius: r1 } => {
                let ac = self.cap_corner();
                let low = (b * ac * ac).min(0.0);
                (DVector::from_vec(vec![-r1, low]), DVector::from_vec(vec![r1, r1]))
            }
        }
    }

    /// Uniform interior sample by rejection from the bounding box.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let (lo, hi) = self.bounding_box();
        loop {
            let x = DVector::from_iterator(self.dim(), (0..self.dim()).map(|i| rng.gen_range(lo[i]..hi[i])));
            if self.contains_open(&x) {
                return x;
            }
        }
    }

    /// Boundary point at curve parameter `t in [0, 1)`.
    ///
    /// The disk is traversed from the origin; the cap runs along the parabola
    /// for `t < 1/2` and along the arc afterwards.
    pub fn boundary_point(&self, t: f64) -> DVector<f64> {
        let t = t.rem_euclid(1.0);
        match self.shape {
            Shape::Interval { length } => DVector::from_element(1, if t < 0.5 { 0.0 } else { length }),
            Shape::TangentDisk { radius } => {
                let a = 2.0 * std::f64::consts::PI * t;
                DVector::from_vec(vec![radius * a.sin(), 2.0 * radius * (0.5 * a).sin().powi(2)])
            }
            Shape::ParabolaCap { curvature: b, cap_radius: r1 } => {
                let ac = self.cap_corner();
                if t < 0.5 {
                    let a = -ac + 4.0 * ac * t;
                    DVector::from_vec(vec![a, b * a * a])
                } else {
                    let phic = (b * ac * ac).atan2(ac);
                    let ang = phic + (std::f64::consts::PI - 2.0 * phic) * (2.0 * t - 1.0);
                    DVector::from_vec(vec![r1 * ang.cos(), r1 * ang.sin()])
                }
            }
        }
    }

    /// `n` boundary points at parameters `(i + 1/2) / n`.
    pub fn boundary_samples(&self, n: usize) -> Vec<DVector<f64>> {
        (0..n).map(|i| self.boundary_point((i as f64 + 0.5) / n as f64)).collect()
    }

    /// Boundary samples used for the tangency constant, excluding the origin.
    ///
    /// For the cap only the parabolic part is used; the closing arc is an
    /// artefact of the local model and does not pass near the singularity.
    pub fn tangency_samples(&self, n: usize) -> Vec<DVector<f64>> {
        match self.shape {
            Shape::Interval { length } => vec![DVector::from_element(1, length)],
            Shape::TangentDisk { .. } => {
                let mut v = self.boundary_samples(n);
                for j in 1..=30 {
                    let t = 0.5f64.powi(j);
                    v.push(self.boundary_point(t));
                    v.push(self.boundary_point(1.0 - t));
                }
                v
            }
            Shape::ParabolaCap { curvature: b, .. } => {
                let ac = self.cap_corner();
                let mut v: Vec<DVector<f64>> = (0..n)
                    .map(|i| -ac + 2.0 * ac * (i as f64 + 0.5) / n as f64)
                    .filter(|a| *a != 0.0)
                    .map(|a| DVector::from_vec(vec![a, b * a * a]))
                    .collect();
                for j in 1..=30 {
                    let a = ac * 0.5f64.powi(j);
                    v.push(DVector::from_vec(vec![a, b * a * a]));
                    v.push(DVector::from_vec(vec![-a, b * a * a]));
                }
                v
            }
        }
    }

    fn sample_tangency(&self) -> f64 {
        self.tangency_samples(TANGENCY_SAMPLES)
            .iter()
            .filter(|p| p.norm() > 0.0)
            .map(|p| {
                let n = self.outward_normal(p).expect("sample lies on the boundary");
                p.dot(&n).abs() / p.norm_squared()
            })
            .fold(0.0, f64::max)
    }

    /// `n` interior points on the sphere `|x| = r`, spread over the arc inside the domain.
    pub fn radial_samples(&self, r: f64, n: usize) -> Vec<DVector<f64>> {
        if !(r > 0.0) || n == 0 {
            return Vec::new();
        }
        let arc = |phi_min: f64| -> Vec<DVector<f64>> {
            let span = std::f64::consts::PI - 2.0 * phi_min;
            (0..n)
                .map(|i| {
                    let a = phi_min + span * (i as f64 + 0.5) / n as f64;
                    DVector::from_vec(vec![r * a.cos(), r * a.sin()])
                })
                .filter(|x| self.strictly_inside(x))
                .collect()
        };
        match self.shape {
            Shape::Interval { length } => {
                if r < length {
                    vec![DVector::from_element(1, r)]
                } else {
                    Vec::new()
                }
            }
            Shape::TangentDisk { radius } => {
                if r >= 2.0 * radius {
                    return Vec::new();
                }
                arc((r / (2.0 * radius)).asin())
            }
            Shape::ParabolaCap { curvature: b, cap_radius: r1 } => {
                if r >= r1 {
                    return Vec::new();
                }
                let g = |phi: f64| phi.sin() - b * r * phi.cos().powi(2);
                let (mut lo, mut hi) = (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                arc(hi)
            }
        }
    }

    /// Collar points `p - t n(p)` with `0 < t <= beta0 / 2`.
    pub fn collar_samples(&self, n: usize) -> Vec<DVector<f64>> {
        let ts: Vec<f64> =
            (1..=8).map(|j| self.beta0 * 0.5 * 0.5f64.powi(j - 1)).chain((1..=12).map(|j| self.beta0 * 0.5 * 0.5f64.powi(4 * j))).collect();
        let bases = match self.shape {
            Shape::ParabolaCap { .. } => self.tangency_samples(n / ts.len()),
            _ => self.boundary_samples((n / ts.len()).max(2)),
        };
        let mut out = Vec::new();
        for p in &bases {
            let Ok(nrm) = self.outward_normal(p) else { continue };
            for &t in &ts {
                let x = p - &nrm * t;
                if self.contains_open(&x) && x.norm() > 0.0 {
                    out.push(x);
                }
            }
        }
        out
    }

    fn sample_growth(&self) -> f64 {
        self.collar_samples(TANGENCY_SAMPLES)
            .iter()
            .filter_map(|x| {
                let p = self.project_to_boundary(x).ok()?;
                Some(p.norm() / x.norm())
            })
            .fold(0.0, f64::max)
    }

    /// Largest collar width with a numerically unique projection near the origin.
    ///
    /// Points where the two nearest boundary features tie are located on a
    /// grid restricted to `|x| <= r_1 / 2`; the cap corners would otherwise
    /// force the width to zero.
    fn cap_unique_collar(&self, r1: f64) -> f64 {
        let (lo, hi) = self.bounding_box();
        let mut best = r1 / 2.0;
        let tie_tol = 1e-3 * r1;
        for i in 0..TIE_GRID {
            for j in 0..TIE_GRID {
                let x = DVector::from_vec(vec![
                    lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / TIE_GRID as f64,
                    lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / TIE_GRID as f64,
                ]);
                if x.norm() > r1 / 2.0 || !self.contains(&x) {
                    continue;
                }
                let c = self.candidates(&x);
                if c.len() < 2 {
                    continue;
                }
                let first = &c[0];
                if let Some(second) = c[1..].iter().find(|k| (&k.point - &first.point).norm() > 10.0 * tie_tol) {
                    if second.dist - first.dist <= tie_tol {
                        best = best.min(first.dist);
                    }
                }
            }
        }
        best
    }
}
