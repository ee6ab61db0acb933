use geometry::{DomainGeometry, Regions};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of random points drawn per stratum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleCounts {
    /// Points with `|x| < r_0`, on top of the log-radial layers.
    pub near: usize,
    /// Points of `Omega \ (closure(omega_0) U B(0, r_0))`.
    pub bulk: usize,
    /// Points of `omega_0`.
    pub core: usize,
    pub boundary: usize,
}

impl Default for SampleCounts {
    fn default() -> Self {
        Self { near: 4000, bulk: 4000, core: 2000, boundary: 2000 }
    }
}

impl SampleCounts {
    pub fn halved(&self) -> Self {
        Self { near: self.near / 2, bulk: self.bulk / 2, core: self.core / 2, boundary: self.boundary / 2 }
    }
}

/// Interior and boundary sample points for one audit.
#[derive(Clone, Debug, Default)]
pub struct AuditSamples {
    pub interior: Vec<DVector<f64>>,
    pub boundary: Vec<DVector<f64>>,
}

impl AuditSamples {
    pub fn len(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

const LAYERS: i32 = 20;
const LAYER_DIRECTIONS: usize = 16;
const MAX_REJECTIONS: usize = 1_000_000;

/// Stratified samples: log-radial layers `2^-j r_0` and uniform radii below
/// `r_0`, then uniform points of the bulk and of `omega_0`, and boundary
/// points refined towards the origin.
pub fn stratified_samples(geometry: &DomainGeometry, regions: &Regions, r0: f64, counts: SampleCounts, seed: u64) -> AuditSamples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut interior = Vec::new();

    let layer_radii = (1..=LAYERS).map(|j| r0 * 0.5f64.powi(j)).chain((1..=10).map(|j| r0 * (1.0 - 0.5f64.powi(j))));
    for r in layer_radii {
        interior.extend(geometry.radial_samples(r, LAYER_DIRECTIONS));
    }
    let mut drawn = 0;
    let mut tries = 0;
    while drawn < counts.near && tries < MAX_REJECTIONS {
        tries += 1;
        let r = r0 * rng.gen_range(0.0..1.0f64);
        let arc = geometry.radial_samples(r, 64);
        if arc.is_empty() {
            continue;
        }
        let mut x = arc[rng.gen_range(0..arc.len())].clone();
        if x.len() == 2 {
            // Jitter the angle inside the arc so points are not confined to the 64 rays.
            let a = x[1].atan2(x[0]) + rng.gen_range(-0.5..0.5) * std::f64::consts::PI / 64.0;
            let y = DVector::from_vec(vec![r * a.cos(), r * a.sin()]);
            if geometry.strictly_inside(&y) {
                x = y;
            }
        }
        interior.push(x);
        drawn += 1;
    }

    let mut fill = |accept: &dyn Fn(&DVector<f64>) -> bool, n: usize, out: &mut Vec<DVector<f64>>| {
        let mut got = 0;
        let mut tries = 0;
        while got < n && tries < MAX_REJECTIONS {
            tries += 1;
            let x = geometry.sample_interior(&mut rng);
            if accept(&x) {
                out.push(x);
                got += 1;
            }
        }
    };
    fill(&|x| x.norm() >= r0 && !regions.omega0.contains_closure(x), counts.bulk, &mut interior);
    fill(&|x| regions.omega0.contains(x), counts.core, &mut interior);
    interior.retain(|x| x.norm() > 0.0);

    let mut boundary = geometry.boundary_samples(counts.boundary);
    if geometry.dim() == 2 {
        for j in 4..=40 {
            let t = 0.5f64.powi(j);
            boundary.push(geometry.boundary_point(t));
            boundary.push(geometry.boundary_point(1.0 - t));
        }
    }
    boundary.sort_by(|a, b| a.as_slice().partial_cmp(b.as_slice()).unwrap_or(std::cmp::Ordering::Equal));
    boundary.dedup();

    AuditSamples { interior, boundary }
}

/// Unit directions for quadratic forms: `n` angles in `[0, pi)` in the plane, `+-1` on the line.
pub fn unit_directions(dim: usize, n: usize) -> Vec<DVector<f64>> {
    if dim == 1 {
        return vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)];
    }
    (0..n)
        .map(|k| {
            let a = std::f64::consts::PI * k as f64 / n as f64;
            DVector::from_vec(vec![a.cos(), a.sin()])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use geometry::SubsetShape;

    fn disk() -> (DomainGeometry, Regions) {
        let g = DomainGeometry::tangent_disk(2.0).unwrap();
        let c = DVector::from_vec(vec![0.0, 2.0]);
        let r =
            Regions::new(&g, SubsetShape::Ball { center: c.clone(), radius: 0.8 }, SubsetShape::Ball { center: c, radius: 0.5 }).unwrap();
        (g, r)
    }

    #[test]
    fn strata_are_populated_and_inside() {
        let (g, r) = disk();
        let r0 = 1e-3;
        let s = stratified_samples(&g, &r, r0, SampleCounts::default(), 3);
        let near = s.interior.iter().filter(|x| x.norm() < r0).count();
        let core = s.interior.iter().filter(|x| r.omega0.contains(x)).count();
        assert!(near >= 4000 && core == 2000);
        assert!(s.interior.len() >= 10_000);
        assert!(s.interior.iter().all(|x| g.strictly_inside(x) && g.contains(x)));
        assert!(s.boundary.iter().all(|p| g.outward_normal(p).is_ok()));
        assert!(s.boundary.iter().any(|p| p.norm() < 1e-9));
    }

    #[test]
    fn samples_are_reproducible() {
        let (g, r) = disk();
        let a = stratified_samples(&g, &r, 1e-3, SampleCounts::default().halved(), 11);
        let b = stratified_samples(&g, &r, 1e-3, SampleCounts::default().halved(), 11);
        assert_eq!(a.interior, b.interior);
        assert_eq!(a.boundary, b.boundary);
    }

    #[test]
    fn interval_boundary_is_deduplicated() {
        let g = DomainGeometry::interval(1.0).unwrap();
        let r = Regions::new(&g, SubsetShape::Interval { a: 0.55, b: 0.75 }, SubsetShape::Interval { a: 0.6, b: 0.7 }).unwrap();
        let s = stratified_samples(&g, &r, 1e-4, SampleCounts::default(), 1);
        assert_eq!(s.boundary.len(), 2);
        assert_eq!(unit_directions(1, 64).len(), 2);
        assert_eq!(unit_directions(2, 64).len(), 64);
    }
}
