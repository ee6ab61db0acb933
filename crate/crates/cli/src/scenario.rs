//! Scenario documents: one JSON object per run, unknown keys rejected.

use std::path::{Path, PathBuf};

use carleman_audit::{SampleCounts, DEFAULT_LAMBDA_GRID};
use geometry::{DomainGeometry, Regions, Shape, SubsetShape};
use nalgebra::DVector;
use pde::{PolarSpec, Scheme};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometrySpec {
    Interval { length: f64 },
    TangentDisk { radius: f64 },
    ParabolaCap { curvature: f64, cap_radius: f64 },
}

impl GeometrySpec {
    pub fn shape(&self) -> Shape {
        match *self {
            GeometrySpec::Interval { length } => Shape::Interval { length },
            GeometrySpec::TangentDisk { radius } => Shape::TangentDisk { radius },
            GeometrySpec::ParabolaCap { curvature, cap_radius } => Shape::ParabolaCap { curvature, cap_radius },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Interval { a: f64, b: f64 },
    Ball { center: Vec<f64>, radius: f64 },
}

impl SetSpec {
    pub fn shape(&self) -> SubsetShape {
        match self {
            SetSpec::Interval { a, b } => SubsetShape::Interval { a: *a, b: *b },
            SetSpec::Ball { center, radius } => SubsetShape::Ball { center: DVector::from_column_slice(center), radius: *radius },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsSpec {
    pub omega: SetSpec,
    pub omega0: SetSpec,
}

impl RegionsSpec {
    /// Control sets placed away from the singular point: nested subintervals of
    /// the interval, concentric balls around the centre of the disk.
    pub fn preset(geometry: &GeometrySpec) -> Option<Self> {
        match *geometry {
            GeometrySpec::Interval { length } => Some(Self {
                omega: SetSpec::Interval { a: 0.55 * length, b: 0.75 * length },
                omega0: SetSpec::Interval { a: 0.6 * length, b: 0.7 * length },
            }),
            GeometrySpec::TangentDisk { radius } => Some(Self {
                omega: SetSpec::Ball { center: vec![0.0, radius], radius: 0.4 * radius },
                omega0: SetSpec::Ball { center: vec![0.0, radius], radius: 0.25 * radius },
            }),
            GeometrySpec::ParabolaCap { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    ImplicitEuler,
    CrankNicolson,
}

impl From<SchemeSpec> for Scheme {
    fn from(s: SchemeSpec) -> Self {
        match s {
            SchemeSpec::ImplicitEuler => Scheme::ImplicitEuler,
            SchemeSpec::CrankNicolson => Scheme::CrankNicolson,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarMesh {
    pub rings: usize,
    pub angles: usize,
    pub r_min: f64,
    pub r_max_fraction: f64,
}

impl PolarMesh {
    fn coarse() -> Self {
        Self { rings: 24, angles: 24, r_min: 1e-3, r_max_fraction: 0.999 }
    }
}

impl Default for PolarMesh {
    fn default() -> Self {
        let p = PolarSpec::default();
        Self { rings: p.rings, angles: p.angles, r_min: p.r_min, r_max_fraction: p.r_max_fraction }
    }
}

impl From<PolarMesh> for PolarSpec {
    fn from(p: PolarMesh) -> Self {
        PolarSpec { rings: p.rings, angles: p.angles, r_min: p.r_min, r_max_fraction: p.r_max_fraction }
    }
}

/// Replacements for recipe-computed constants.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub delta: Option<f64>,
    pub r0: Option<f64>,
    pub c3: Option<f64>,
    pub c_lambda: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSpec {
    pub near: usize,
    pub bulk: usize,
    pub core: usize,
    pub boundary: usize,
    pub directions: usize,
    pub required_margin: f64,
}

impl Default for AuditSpec {
    fn default() -> Self {
        let c = SampleCounts::default();
        Self { near: c.near, bulk: c.bulk, core: c.core, boundary: c.boundary, directions: 64, required_margin: 0.0 }
    }
}

impl AuditSpec {
    pub fn counts(&self) -> SampleCounts {
        SampleCounts { near: self.near, bulk: self.bulk, core: self.core, boundary: self.boundary }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardySpec {
    /// Interval length and disk radius of the Hardy cases.
    pub size: f64,
    pub interval_levels: Vec<usize>,
    /// Runs the boundary-versus-interior comparison on disks.
    pub two_dimensional: bool,
    pub polar: PolarMesh,
    pub shift_levels: Vec<usize>,
    /// `mu` of the shift estimate; the critical value when absent.
    pub shift_mu: Option<f64>,
    pub inequality_cells: usize,
    pub fields: usize,
    pub c3_grid: Vec<f64>,
    pub norm_mu: Vec<f64>,
    pub appendix_samples: usize,
    pub appendix_r1: Option<f64>,
    /// The two-dimensional appendix check runs on the tangent disk of this radius.
    pub appendix_disk_radius: f64,
}

impl Default for HardySpec {
    fn default() -> Self {
        Self {
            size: 1.0,
            interval_levels: vec![100, 200, 400, 800, 1600],
            two_dimensional: true,
            polar: PolarMesh::default(),
            shift_levels: vec![100, 200, 400, 800],
            shift_mu: None,
            inequality_cells: 400,
            fields: 500,
            c3_grid: vec![0.25, 0.5, 1.0, 2.0],
            norm_mu: vec![0.25, 0.2, 0.0, -0.3],
            appendix_samples: 200,
            appendix_r1: None,
            appendix_disk_radius: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySpec {
    pub cells: usize,
    pub polar: PolarMesh,
    pub horizon: f64,
    pub steps: usize,
    pub mu: Vec<f64>,
    pub schemes: Vec<SchemeSpec>,
    /// Snapshot stride of the trajectory written for the first run.
    pub stride: usize,
}

impl Default for EnergySpec {
    fn default() -> Self {
        Self {
            cells: 256,
            polar: PolarMesh::coarse(),
            horizon: 0.5,
            steps: 500,
            mu: vec![0.0, 0.2, 0.25],
            schemes: vec![SchemeSpec::ImplicitEuler, SchemeSpec::CrankNicolson],
            stride: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSpec {
    pub mu: Vec<f64>,
    pub length: f64,
    pub levels: Vec<usize>,
    pub t_probe: f64,
    pub dt_max: f64,
    pub scheme: SchemeSpec,
    pub bump_width: f64,
    pub energy: EnergySpec,
}

impl Default for SimulateSpec {
    fn default() -> Self {
        let b = pde::BlowupConfig::default();
        Self {
            mu: vec![0.2, 0.35],
            length: b.length,
            levels: b.levels,
            t_probe: b.t_probe,
            dt_max: b.dt_max,
            scheme: SchemeSpec::ImplicitEuler,
            bump_width: b.bump_width,
            energy: EnergySpec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSpec {
    pub cells: usize,
    pub polar: PolarMesh,
    /// Control set; `regions.omega` when absent.
    pub omega: Option<SetSpec>,
    pub epsilons: Vec<f64>,
    pub scheme: SchemeSpec,
    /// Largest time step; the mesh size, at most `T / 100`, when absent.
    pub dt_max: Option<f64>,
    pub cg_tol: f64,
    pub max_iter: usize,
    pub symmetry_probes: usize,
}

impl Default for ControlSpec {
    fn default() -> Self {
        Self {
            cells: 256,
            polar: PolarMesh::coarse(),
            omega: None,
            epsilons: vec![1e-2, 1e-4, 1e-6],
            scheme: SchemeSpec::ImplicitEuler,
            dt_max: None,
            cg_tol: 1e-10,
            max_iter: 500,
            symmetry_probes: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservabilitySpec {
    /// Unknowns of the observability mesh; the control mesh settings are reused
    /// with this many interval cells.
    pub cells: usize,
    /// Values of `mu` scanned at the scenario horizon; the scenario list when absent.
    pub mu: Option<Vec<f64>>,
    /// Horizons scanned at the design `mu`.
    pub horizons: Vec<f64>,
    pub epsilon: f64,
}

impl Default for ObservabilitySpec {
    fn default() -> Self {
        Self { cells: 64, mu: None, horizons: vec![0.25, 0.5, 1.0], epsilon: 1e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub geometry: GeometrySpec,
    /// `omega` and `omega_0`; a preset for the geometry when absent.
    pub regions: Option<RegionsSpec>,
    pub gamma: f64,
    pub s: f64,
    pub horizon: f64,
    pub lambda_grid: Vec<f64>,
    /// Values of `mu` for control runs. The weights use the entry of largest modulus.
    pub mu: Vec<f64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub overrides: Overrides,
    pub audit: AuditSpec,
    pub hardy: HardySpec,
    pub simulate: SimulateSpec,
    pub control: ControlSpec,
    pub observability: ObservabilitySpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "tangent-disk".into(),
            geometry: GeometrySpec::TangentDisk { radius: 2.0 },
            regions: None,
            gamma: 1.5,
            s: 1.0,
            horizon: 0.5,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            mu: vec![0.2],
            seed: None,
            output: None,
            overrides: Overrides::default(),
            audit: AuditSpec::default(),
            hardy: HardySpec::default(),
            simulate: SimulateSpec::default(),
            control: ControlSpec::default(),
            observability: ObservabilitySpec::default(),
        }
    }
}

/// Default value of `C_3` when the scenario does not override it.
pub const DEFAULT_C3: f64 = 0.5;

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        s.resolve()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Fills presets and validates plain ranges; deeper checks happen when the
    /// geometry and regions are built.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        if self.regions.is_none() {
            self.regions = Some(
                RegionsSpec::preset(&self.geometry)
                    .ok_or_else(|| CliError::Config("this geometry has no preset regions; give `regions`".into()))?,
            );
        }
        let bad = |m: String| Err(CliError::Config(m));
        if self.mu.is_empty() {
            return bad("`mu` must list at least one value".into());
        }
        if self.lambda_grid.is_empty() {
            return bad("`lambda_grid` must not be empty".into());
        }
        if !(self.horizon > 0.0) {
            return bad(format!("`horizon` must be positive, got {}", self.horizon));
        }
        if let Some(c) = self.overrides.c3 {
            if !(c > 0.0) {
                return bad(format!("`overrides.c3` must be positive, got {c}"));
            }
        }
        if let Some(c) = self.overrides.c_lambda {
            if !(c > 0.0 && c.is_finite()) {
                return bad(format!("`overrides.c_lambda` must be positive, got {c}"));
            }
        }
        if self.control.epsilons.is_empty() {
            return bad("`control.epsilons` must not be empty".into());
        }
        Ok(self)
    }

    pub fn regions_spec(&self) -> &RegionsSpec {
        self.regions.as_ref().expect("resolved scenario")
    }

    pub fn geometry(&self) -> Result<DomainGeometry, CliError> {
        DomainGeometry::from_shape(self.geometry.shape()).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn regions(&self, g: &DomainGeometry) -> Result<Regions, CliError> {
        let r = self.regions_spec();
        Regions::new(g, r.omega.shape(), r.omega0.shape()).map_err(|e| CliError::Config(e.to_string()))
    }

    /// `mu` used by the weight recipes: the listed value of largest modulus.
    pub fn design_mu(&self) -> f64 {
        self.mu.iter().copied().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a })
    }

    pub fn c3(&self) -> f64 {
        self.overrides.c3.unwrap_or(DEFAULT_C3)
    }

    pub fn control_omega(&self) -> SubsetShape {
        self.control.omega.as_ref().unwrap_or(&self.regions_spec().omega).shape()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }
}
