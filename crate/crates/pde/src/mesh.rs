use geometry::{DomainGeometry, Shape};

use crate::PdeError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshKind {
    /// Uniform grid of `(0, L)`.
    Interval,
    /// Polar mesh of the disk of radius `R` centred at `(0, R)`; the origin is on the boundary.
    TangentDisk,
    /// Polar mesh of the disk of radius `R` centred at the origin; the centre node is pinned.
    CenteredDisk,
}

/// Ring layout of a polar mesh: `rings` geometric radii from `r_min` to `r_max_fraction * R_max`,
/// each carrying `angles` angular cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarSpec {
    pub rings: usize,
    pub angles: usize,
    pub r_min: f64,
    pub r_max_fraction: f64,
}

impl Default for PolarSpec {
    fn default() -> Self {
        Self { rings: 200, angles: 128, r_min: 1e-6, r_max_fraction: 0.999 }
    }
}

/// Conforming P1 mesh with the Dirichlet set marked. Coordinates are stored as
/// `[x, 0]` in one dimension.
#[derive(Clone, Debug)]
pub struct Mesh {
    kind: MeshKind,
    dim: usize,
    coords: Vec<[f64; 2]>,
    segments: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    dirichlet: Vec<bool>,
    dof_of_node: Vec<Option<usize>>,
    free_nodes: Vec<usize>,
    h: f64,
}

impl Mesh {
    /// `cells` equal segments of `(0, length)`; both endpoints are Dirichlet.
    pub fn interval(length: f64, cells: usize) -> Result<Self, PdeError> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(PdeError::InvalidMesh(format!("interval length must be positive, got {length}")));
        }
        if cells < 2 {
            return Err(PdeError::InvalidMesh(format!("need at least 2 cells, got {cells}")));
        }
        let h = length / cells as f64;
        let coords = (0..=cells).map(|i| [i as f64 * h, 0.0]).collect();
        let segments = (0..cells).map(|i| [i, i + 1]).collect();
        let mut dirichlet = vec![false; cells + 1];
        dirichlet[0] = true;
        dirichlet[cells] = true;
        Ok(Self::finish(MeshKind::Interval, 1, coords, segments, Vec::new(), dirichlet, h))
    }

    /// Boundary-fitted mesh of the disk of radius `R` tangent to the horizontal axis at the origin.
    ///
    /// A log-polar grid of the upper half-plane, with radii geometric from `r_min / 2R` to
    /// `1 / (1 - r_max_fraction)`, is pushed forward by the Möbius map `w -> 2R i w / (w + i)`.
    /// The map is conformal, sends the real axis onto the circle and fixes the origin with
    /// derivative `2R`, so rings near the singular point are almost circles of radius `r`.
    /// The origin and the apex `(0, 2R)` close the fans.
    pub fn tangent_disk(radius: f64, spec: PolarSpec) -> Result<Self, PdeError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(PdeError::InvalidMesh(format!("disk radius must be positive, got {radius}")));
        }
        check_spec(&spec, 2.0 * radius)?;
        let w_min = spec.r_min / (2.0 * radius);
        let w_max = 1.0 / (1.0 - spec.r_max_fraction).max(1e-12);
        if !(w_max > w_min) {
            return Err(PdeError::InvalidMesh("r_min too large for the requested apex distance".into()));
        }
        let radii = geometric(w_min, w_max, spec.rings);
        let m = spec.angles;
        let mut coords = vec![[0.0, 0.0]];
        let mut dirichlet = vec![true];
        for &r in &radii {
            for j in 0..=m {
                let t = std::f64::consts::PI * j as f64 / m as f64;
                let (wr, wi) = if j == 0 {
                    (r, 0.0)
                } else if j == m {
                    (-r, 0.0)
                } else {
                    (r * t.cos(), r * t.sin())
                };
                coords.push(mobius(radius, wr, wi));
                dirichlet.push(j == 0 || j == m);
            }
        }
        let apex = coords.len();
        coords.push([0.0, 2.0 * radius]);
        dirichlet.push(true);
        let ring = |k: usize, j: usize| 1 + k * (m + 1) + j;
        let mut triangles = Vec::new();
        for j in 0..m {
            triangles.push([0, ring(0, j), ring(0, j + 1)]);
        }
        for k in 0..radii.len() - 1 {
            for j in 0..m {
                triangles.push([ring(k, j), ring(k + 1, j), ring(k + 1, j + 1)]);
                triangles.push([ring(k, j), ring(k + 1, j + 1), ring(k, j + 1)]);
            }
        }
        let last = radii.len() - 1;
        for j in 0..m {
            triangles.push([ring(last, j), apex, ring(last, j + 1)]);
        }
        Self::finish_2d(MeshKind::TangentDisk, coords, triangles, dirichlet)
    }

    /// Polar mesh of the disk of radius `radius` centred at the origin, with the
    /// centre node pinned to zero and the outer ring Dirichlet.
    pub fn centered_disk(radius: f64, spec: PolarSpec) -> Result<Self, PdeError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(PdeError::InvalidMesh(format!("disk radius must be positive, got {radius}")));
        }
        check_spec(&spec, radius)?;
        let mut inner = geometric(spec.r_min, spec.r_max_fraction * radius, spec.rings);
        // the outer ring sits exactly on the boundary
        *inner.last_mut().expect("at least two rings") = radius;
        let m = spec.angles;
        let mut coords = vec![[0.0, 0.0]];
        let mut dirichlet = vec![true];
        for (k, &r) in inner.iter().enumerate() {
            for j in 0..m {
                let t = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                coords.push([r * t.cos(), r * t.sin()]);
                dirichlet.push(k + 1 == inner.len());
            }
        }
        let ring = |k: usize, j: usize| 1 + k * m + (j % m);
        let mut triangles = Vec::new();
        for j in 0..m {
            triangles.push([0, ring(0, j), ring(0, j + 1)]);
        }
        for k in 0..inner.len() - 1 {
            for j in 0..m {
                triangles.push([ring(k, j), ring(k + 1, j), ring(k + 1, j + 1)]);
                triangles.push([ring(k, j), ring(k + 1, j + 1), ring(k, j + 1)]);
            }
        }
        Self::finish_2d(MeshKind::CenteredDisk, coords, triangles, dirichlet)
    }

    /// Mesh for a supported domain: uniform cells on the interval, polar rings on the tangent disk.
    pub fn for_geometry(geometry: &DomainGeometry, cells: usize, polar: PolarSpec) -> Result<Self, PdeError> {
        match geometry.shape() {
            Shape::Interval { length } => Self::interval(length, cells),
            Shape::TangentDisk { radius } => Self::tangent_disk(radius, polar),
            Shape::ParabolaCap { .. } => Err(PdeError::Unsupported("no mesh generator for the parabola cap".into())),
        }
    }

    fn finish_2d(kind: MeshKind, coords: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, dirichlet: Vec<bool>) -> Result<Self, PdeError> {
        let mut h: f64 = 0.0;
        for t in &triangles {
            let area = signed_area(&coords, t);
            if !(area.abs() > 0.0) {
                return Err(PdeError::InvalidMesh(format!("degenerate triangle {t:?}")));
            }
            for e in 0..3 {
                let (a, b) = (coords[t[e]], coords[t[(e + 1) % 3]]);
                h = h.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        Ok(Self::finish(kind, 2, coords, Vec::new(), triangles, dirichlet, h))
    }

    fn finish(
        kind: MeshKind,
        dim: usize,
        coords: Vec<[f64; 2]>,
        segments: Vec<[usize; 2]>,
        triangles: Vec<[usize; 3]>,
        dirichlet: Vec<bool>,
        h: f64,
    ) -> Self {
        let mut dof_of_node = vec![None; coords.len()];
        let mut free_nodes = Vec::new();
        for (i, &d) in dirichlet.iter().enumerate() {
            if !d {
                dof_of_node[i] = Some(free_nodes.len());
                free_nodes.push(i);
            }
        }
        Self { kind, dim, coords, segments, triangles, dirichlet, dof_of_node, free_nodes, h }
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest element edge.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    pub fn dof_count(&self) -> usize {
        self.free_nodes.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn segments(&self) -> &[[usize; 2]] {
        &self.segments
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_dirichlet(&self, node: usize) -> bool {
        self.dirichlet[node]
    }

    pub fn dof_of_node(&self, node: usize) -> Option<usize> {
        self.dof_of_node[node]
    }

    /// Node index of every unknown, in unknown order.
    pub fn free_nodes(&self) -> &[usize] {
        &self.free_nodes
    }

    /// Coordinates of the unknowns, trimmed to the mesh dimension.
    pub fn dof_points(&self) -> Vec<Vec<f64>> {
        self.free_nodes.iter().map(|&n| self.coords[n][..self.dim].to_vec()).collect()
    }

    /// Samples `f` at the unknowns.
    pub fn interpolate<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        self.free_nodes.iter().map(|&n| f(&self.coords[n][..self.dim])).collect()
    }

    /// Extends unknown values by zero to every node.
    pub fn extend_by_zero(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.coords.len()];
        for (&n, v) in self.free_nodes.iter().zip(values) {
            out[n] = *v;
        }
        out
    }
}

/// `2R i w / (w + i)` for `w = a + i b`.
fn mobius(radius: f64, a: f64, b: f64) -> [f64; 2] {
    // 2R i w / (w + i) = 2R (i a - b) (a - i (b + 1)) / (a^2 + (b + 1)^2)
    let d = a * a + (b + 1.0) * (b + 1.0);
    let re = -b * a + a * (b + 1.0);
    let im = a * a + b * (b + 1.0);
    [2.0 * radius * re / d, 2.0 * radius * im / d]
}

pub(crate) fn signed_area(coords: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let (a, b, c) = (coords[t[0]], coords[t[1]], coords[t[2]]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn check_spec(spec: &PolarSpec, r_outer: f64) -> Result<(), PdeError> {
    if spec.rings < 2 || spec.angles < 3 {
        return Err(PdeError::InvalidMesh(format!("need at least 2 rings and 3 angles, got {} and {}", spec.rings, spec.angles)));
    }
    if !(spec.r_max_fraction > 0.0 && spec.r_max_fraction <= 1.0 && spec.r_min > 0.0 && spec.r_min < spec.r_max_fraction * r_outer) {
        return Err(PdeError::InvalidMesh(format!(
            "ring radii must satisfy 0 < r_min < r_max <= R, got r_min {} and fraction {}",
            spec.r_min, spec.r_max_fraction
        )));
    }
    Ok(())
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln();
    (0..n).map(|k| lo * (ratio * k as f64 / (n - 1) as f64).exp()).collect()
}
