use linalg::CsrMatrix;

use crate::mesh::{signed_area, Mesh};
use crate::PdeError;

/// P1 stiffness and lumped mass on the unknowns of a mesh, with the node radii
/// needed for the inverse-power weights.
#[derive(Clone, Debug)]
pub struct Discretization {
    mesh: Mesh,
    stiffness: CsrMatrix,
    mass: Vec<f64>,
    radii: Vec<f64>,
}

impl Discretization {
    pub fn new(mesh: Mesh) -> Result<Self, PdeError> {
        let n = mesh.dof_count();
        let coords = mesh.coords();
        let mut trip = Vec::new();
        let mut mass = vec![0.0; n];
        let add = |trip: &mut Vec<(usize, usize, f64)>, a: usize, b: usize, v: f64| {
            if let (Some(i), Some(j)) = (mesh.dof_of_node(a), mesh.dof_of_node(b)) {
                trip.push((i, j, v));
            }
        };
        for s in mesh.segments() {
            let len = (coords[s[1]][0] - coords[s[0]][0]).abs();
            for a in 0..2 {
                for b in 0..2 {
                    add(&mut trip, s[a], s[b], if a == b { 1.0 / len } else { -1.0 / len });
                }
                if let Some(i) = mesh.dof_of_node(s[a]) {
                    mass[i] += 0.5 * len;
                }
            }
        }
        for t in mesh.triangles() {
            let area = signed_area(coords, t).abs();
            let p = [coords[t[0]], coords[t[1]], coords[t[2]]];
            // gradient of the barycentric coordinate k is (b_k, c_k) / (2 area)
            let b: [f64; 3] = std::array::from_fn(|k| p[(k + 1) % 3][1] - p[(k + 2) % 3][1]);
            let c: [f64; 3] = std::array::from_fn(|k| p[(k + 2) % 3][0] - p[(k + 1) % 3][0]);
            for i in 0..3 {
                for j in 0..3 {
                    add(&mut trip, t[i], t[j], (b[i] * b[j] + c[i] * c[j]) / (4.0 * area));
                }
                if let Some(k) = mesh.dof_of_node(t[i]) {
                    mass[k] += area / 3.0;
                }
            }
        }
        let stiffness = CsrMatrix::from_triplets(n, n, &trip);
        let mut radii = Vec::with_capacity(n);
        for &node in mesh.free_nodes() {
            let p = coords[node];
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            if !(r > 0.0) {
                return Err(PdeError::SingularNode { node });
            }
            radii.push(r);
        }
        if let Some(i) = mass.iter().position(|&m| !(m > 0.0)) {
            return Err(PdeError::InvalidMesh(format!("unknown {i} has no mass")));
        }
        Ok(Self { mesh, stiffness, mass, radii })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn h(&self) -> f64 {
        self.mesh.h()
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// Lumped mass diagonal.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `|x_i|` at the unknowns.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Lumped weighted mass `m_i |x_i|^-s`.
    pub fn weighted_mass(&self, s: f64) -> Vec<f64> {
        self.mass.iter().zip(&self.radii).map(|(m, r)| m * r.powf(-s)).collect()
    }

    /// Stiffness weighted by `|x|^a`, with the weight taken at element centroids.
    pub fn weighted_stiffness(&self, a: f64) -> CsrMatrix {
        let mesh = &self.mesh;
        let coords = mesh.coords();
        let mut trip = Vec::new();
        let mut add = |p: usize, q: usize, v: f64| {
            if let (Some(i), Some(j)) = (mesh.dof_of_node(p), mesh.dof_of_node(q)) {
                trip.push((i, j, v));
            }
        };
        for s in mesh.segments() {
            let len = (coords[s[1]][0] - coords[s[0]][0]).abs();
            let w = (0.5 * (coords[s[0]][0] + coords[s[1]][0])).abs().powf(a);
            for p in 0..2 {
                for q in 0..2 {
                    add(s[p], s[q], if p == q { w / len } else { -w / len });
                }
            }
        }
        for t in mesh.triangles() {
            let area = signed_area(coords, t).abs();
            let p = [coords[t[0]], coords[t[1]], coords[t[2]]];
            let cx = (p[0][0] + p[1][0] + p[2][0]) / 3.0;
            let cy = (p[0][1] + p[1][1] + p[2][1]) / 3.0;
            let w = (cx * cx + cy * cy).sqrt().powf(a);
            let b: [f64; 3] = std::array::from_fn(|k| p[(k + 1) % 3][1] - p[(k + 2) % 3][1]);
            let c: [f64; 3] = std::array::from_fn(|k| p[(k + 2) % 3][0] - p[(k + 1) % 3][0]);
            for i in 0..3 {
                for j in 0..3 {
                    add(t[i], t[j], w * (b[i] * b[j] + c[i] * c[j]) / (4.0 * area));
                }
            }
        }
        CsrMatrix::from_triplets(self.len(), self.len(), &trip)
    }

    /// Critical constant `N^2 / 4` for a boundary singularity.
    pub fn critical_mu(&self) -> f64 {
        critical_mu(self.dim())
    }

    /// `M`-weighted inner product.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        linalg::weighted_dot(&self.mass, a, b)
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// Strong form `M^-1 A`, the nodal stencil of the operator.
    pub fn strong_form(&self, a: &CsrMatrix) -> CsrMatrix {
        let inv: Vec<f64> = self.mass.iter().map(|m| 1.0 / m).collect();
        a.scale_rows(&inv)
    }
}

pub fn critical_mu(dim: usize) -> f64 {
    (dim * dim) as f64 / 4.0
}

/// Weak form of `-Delta - mu / |x|^2 + C` on the unknowns: `K - mu W_2 + C M`.
pub fn assemble(mu: f64, disc: &Discretization, shift: f64) -> CsrMatrix {
    let w2 = disc.weighted_mass(2.0);
    let d: Vec<f64> = w2.iter().zip(disc.mass()).map(|(w, m)| shift * m - mu * w).collect();
    disc.stiffness().scale_add_diagonal(1.0, &d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::PolarSpec;

    #[test]
    fn interval_stencil_matches_finite_differences() {
        let disc = Discretization::new(Mesh::interval(1.0, 4).unwrap()).unwrap();
        let a = disc.strong_form(&assemble(0.0, &disc, 0.0));
        let h2 = 0.25f64 * 0.25;
        for i in 0..3 {
            assert_eq!(a.get(i, i), 2.0 / h2);
            if i + 1 < 3 {
                assert_eq!(a.get(i, i + 1), -1.0 / h2);
                assert_eq!(a.get(i + 1, i), -1.0 / h2);
            }
        }
        assert_eq!(a.get(0, 2), 0.0);
    }

    #[test]
    fn potential_enters_the_diagonal() {
        let disc = Discretization::new(Mesh::interval(1.0, 8).unwrap()).unwrap();
        let a0 = disc.strong_form(&assemble(0.0, &disc, 0.0));
        let a = disc.strong_form(&assemble(0.2, &disc, 0.0));
        for (i, x) in disc.radii().iter().enumerate() {
            assert!((a.get(i, i) - a0.get(i, i) + 0.2 / (x * x)).abs() < 1e-12 * a0.get(i, i));
        }
    }

    #[test]
    fn exact_symmetry_in_2d() {
        let disc =
            Discretization::new(Mesh::tangent_disk(1.0, PolarSpec { rings: 8, angles: 6, r_min: 1e-2, r_max_fraction: 0.95 }).unwrap())
                .unwrap();
        let a = assemble(0.3, &disc, 1.5);
        assert_eq!(a.symmetry_defect(), 0.0);
        assert!(disc.mass().iter().all(|&m| m > 0.0));
    }

    #[test]
    fn dirichlet_energy_of_a_paraboloid() {
        // u = 1 - |x - c|^2 vanishes on the unit disk tangent at 0; its energy is 2 pi
        let mesh = Mesh::tangent_disk(1.0, PolarSpec { rings: 60, angles: 64, r_min: 1e-3, r_max_fraction: 0.995 }).unwrap();
        let disc = Discretization::new(mesh).unwrap();
        let u = disc.mesh().interpolate(|x| 1.0 - x[0] * x[0] - (x[1] - 1.0).powi(2));
        let energy = disc.stiffness().quadratic_form(&u);
        assert!((energy / (2.0 * std::f64::consts::PI) - 1.0).abs() < 0.02, "{energy}");
    }

    #[test]
    fn weighted_stiffness_reduces_to_stiffness() {
        let disc =
            Discretization::new(Mesh::tangent_disk(1.0, PolarSpec { rings: 8, angles: 6, r_min: 1e-2, r_max_fraction: 0.95 }).unwrap())
                .unwrap();
        let k0 = disc.weighted_stiffness(0.0);
        let k = disc.stiffness();
        for i in 0..disc.len() {
            let (cols, vals) = k.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                assert!((k0.get(i, c) - v).abs() <= 1e-14 * v.abs().max(1.0));
            }
        }
        let d = Discretization::new(Mesh::interval(1.0, 4).unwrap()).unwrap();
        // midpoints 0.125 .. 0.875 and h = 1/4
        let k2 = d.weighted_stiffness(2.0);
        assert!((k2.get(0, 0) - 4.0 * (0.125f64.powi(2) + 0.375f64.powi(2))).abs() < 1e-14);
        assert!((k2.get(0, 1) + 4.0 * 0.375f64.powi(2)).abs() < 1e-14);
    }

    #[test]
    fn positive_definite_for_nonpositive_mu() {
        let disc = Discretization::new(Mesh::interval(1.0, 32).unwrap()).unwrap();
        for mu in [0.0, -1.0] {
            let f = linalg::EnvelopeLdl::factor(&assemble(mu, &disc, 0.0)).unwrap();
            assert!(f.is_positive_definite());
        }
    }
}
