use nalgebra::DVector;

use crate::{DomainGeometry, GeometryError};

/// An open interval or ball used for the control sets `omega` and `omega_0`.
#[derive(Clone, Debug, PartialEq)]
pub enum SubsetShape {
    Interval { a: f64, b: f64 },
    Ball { center: DVector<f64>, radius: f64 },
}

impl SubsetShape {
    pub fn dim(&self) -> usize {
        match self {
            SubsetShape::Interval { .. } => 1,
            SubsetShape::Ball { center, .. } => center.len(),
        }
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        match self {
            SubsetShape::Interval { a, b } => x[0] > *a && x[0] < *b,
            SubsetShape::Ball { center, radius } => (x - center).norm() < *radius,
        }
    }

    pub fn contains_closure(&self, x: &DVector<f64>) -> bool {
        match self {
            SubsetShape::Interval { a, b } => x[0] >= *a && x[0] <= *b,
            SubsetShape::Ball { center, radius } => (x - center).norm() <= *radius,
        }
    }

    pub fn center(&self) -> DVector<f64> {
        match self {
            SubsetShape::Interval { a, b } => DVector::from_element(1, 0.5 * (a + b)),
            SubsetShape::Ball { center, .. } => center.clone(),
        }
    }

    /// Smallest `|x|` over the closure.
    pub fn min_norm(&self) -> f64 {
        match self {
            SubsetShape::Interval { a, b } => {
                if *a <= 0.0 && *b >= 0.0 {
                    0.0
                } else {
                    a.abs().min(b.abs())
                }
            }
            SubsetShape::Ball { center, radius } => (center.norm() - radius).max(0.0),
        }
    }

    /// Whether the closure of `self` lies inside the open set `other`.
    pub fn closure_inside(&self, other: &SubsetShape) -> bool {
        match (self, other) {
            (SubsetShape::Interval { a, b }, SubsetShape::Interval { a: a2, b: b2 }) => a > a2 && b < b2,
            (SubsetShape::Ball { center, radius }, SubsetShape::Ball { center: c2, radius: r2 }) => (center - c2).norm() + radius < *r2,
            _ => false,
        }
    }

    fn validate(&self) -> Result<(), GeometryError> {
        match self {
            SubsetShape::Interval { a, b } if !(a < b) => Err(GeometryError::InvalidRegion(format!("empty interval ({a}, {b})"))),
            SubsetShape::Ball { radius, .. } if !(*radius > 0.0) => {
                Err(GeometryError::InvalidRegion(format!("ball radius must be positive, got {radius}")))
            }
            _ => Ok(()),
        }
    }
}

/// Control set `omega`, inner set `omega_0` and the singular radius `r_0`.
#[derive(Clone, Debug)]
pub struct Regions {
    pub omega: SubsetShape,
    pub omega0: SubsetShape,
    pub r0: Option<f64>,
    /// Non-fatal deviations from the preferred normalization.
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionClass {
    /// `|x| < r_0`.
    NearSingularity,
    /// `x` in `omega_0`, away from the singularity.
    ControlCore,
    /// `x` in `Omega \ (closure(omega_0) U B(0, r_0))`.
    Bulk,
    /// The boundary of `omega_0` outside `B(0, r_0)`.
    ControlRing,
}

impl RegionClass {
    pub fn label(&self) -> &'static str {
        match self {
            RegionClass::NearSingularity => "near_singularity",
            RegionClass::ControlCore => "control_core",
            RegionClass::Bulk => "bulk",
            RegionClass::ControlRing => "control_ring",
        }
    }
}

impl Regions {
    /// Validates `closure(omega_0) ⊂ omega` and `0 ∉ closure(omega)`.
    ///
    /// If `omega` meets the closed unit ball a warning is recorded instead of
    /// an error.
    pub fn new(geometry: &DomainGeometry, omega: SubsetShape, omega0: SubsetShape) -> Result<Self, GeometryError> {
        omega.validate()?;
        omega0.validate()?;
        for s in [&omega, &omega0] {
            if s.dim() != geometry.dim() {
                return Err(GeometryError::DimensionMismatch { expected: geometry.dim(), got: s.dim() });
            }
        }
        if !omega0.closure_inside(&omega) {
            return Err(GeometryError::InvalidRegion("closure of omega_0 must lie inside omega".into()));
        }
        if omega.min_norm() <= 0.0 {
            return Err(GeometryError::InvalidRegion("the origin must not lie in the closure of omega".into()));
        }
        if !geometry.contains_open(&omega0.center()) {
            return Err(GeometryError::InvalidRegion("omega_0 is not centred inside the domain".into()));
        }
        let mut warnings = Vec::new();
        if omega.min_norm() <= 1.0 {
            warnings.push(format!("omega reaches |x| = {:.6} <= 1, so it meets the closed unit ball", omega.min_norm()));
        }
        Ok(Self { omega, omega0, r0: None, warnings })
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.r0 = Some(r0);
        self
    }
}

/// Classifies a point of the domain according to the singular radius and `omega_0`.
pub fn region_classify(geometry: &DomainGeometry, regions: &Regions, x: &DVector<f64>) -> Result<RegionClass, GeometryError> {
    if x.len() != geometry.dim() {
        return Err(GeometryError::DimensionMismatch { expected: geometry.dim(), got: x.len() });
    }
    if !geometry.contains(x) {
        return Err(GeometryError::OutsideDomain { point: x.iter().copied().collect() });
    }
    let r0 = regions.r0.ok_or_else(|| GeometryError::InvalidRegion("r0 has not been set".into()))?;
    Ok(if x.norm() < r0 {
        RegionClass::NearSingularity
    } else if regions.omega0.contains(x) {
        RegionClass::ControlCore
    } else if regions.omega0.contains_closure(x) {
        RegionClass::ControlRing
    } else {
        RegionClass::Bulk
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_regions() -> (DomainGeometry, Regions) {
        let g = DomainGeometry::tangent_disk(2.0).unwrap();
        let c = DVector::from_vec(vec![0.0, 2.0]);
        let r = Regions::new(&g, SubsetShape::Ball { center: c.clone(), radius: 0.8 }, SubsetShape::Ball { center: c, radius: 0.5 })
            .unwrap()
            .with_r0(0.01);
        (g, r)
    }

    #[test]
    fn classification_examples() {
        let (g, r) = disk_regions();
        let at = |v: &[f64]| region_classify(&g, &r, &DVector::from_column_slice(v)).unwrap();
        assert_eq!(at(&[0.0, 0.005]), RegionClass::NearSingularity);
        assert_eq!(at(&[0.0, 2.0]), RegionClass::ControlCore);
        assert_eq!(at(&[0.0, 0.5]), RegionClass::Bulk);
        assert_eq!(at(&[0.0, 1.5]), RegionClass::ControlRing);
        assert!(region_classify(&g, &r, &DVector::from_column_slice(&[5.0, 5.0])).is_err());
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn invalid_regions_rejected() {
        let g = DomainGeometry::interval(1.0).unwrap();
        let bad_nesting = Regions::new(&g, SubsetShape::Interval { a: 0.6, b: 0.8 }, SubsetShape::Interval { a: 0.5, b: 0.7 });
        assert!(bad_nesting.is_err());
        let touches_origin = Regions::new(&g, SubsetShape::Interval { a: 0.0, b: 0.8 }, SubsetShape::Interval { a: 0.5, b: 0.7 });
        assert!(touches_origin.is_err());
        let ok = Regions::new(&g, SubsetShape::Interval { a: 0.55, b: 0.8 }, SubsetShape::Interval { a: 0.6, b: 0.7 }).unwrap();
        assert_eq!(ok.warnings.len(), 1);
    }

    #[test]
    fn requires_r0() {
        let g = DomainGeometry::interval(1.0).unwrap();
        let r = Regions::new(&g, SubsetShape::Interval { a: 0.55, b: 0.8 }, SubsetShape::Interval { a: 0.6, b: 0.7 }).unwrap();
        assert!(region_classify(&g, &r, &DVector::from_element(1, 0.3)).is_err());
    }
}
