use std::time::Instant;

use hardy::*;
use nalgebra::{DMatrix, SymmetricEigen};
use pde::{critical_mu, Discretization, Mesh, PolarSpec};
use proptest::prelude::*;

fn interval(cells: usize) -> Discretization {
    Discretization::new(Mesh::interval(1.0, cells).unwrap()).unwrap()
}

fn interval_levels() -> Vec<LevelSpec> {
    [100, 200, 400, 800, 1600].iter().map(|&cells| LevelSpec::Interval { cells }).collect()
}

#[test]
fn one_dimensional_boundary_constant_decreases_toward_a_quarter() {
    let case = HardyCase { placement: Placement::Boundary, dim: 1, size: 1.0 };
    let r = hardy_study(case, &interval_levels(), 2.0, 0.0).unwrap();
    let finest = r.finest().unwrap();
    assert!((finest.h - 1.0 / 1600.0).abs() < 1e-15);
    assert!((0.25..=0.40).contains(&finest.constant), "{finest:?}");
    assert!(r.levels.windows(2).all(|w| w[1].constant < w[0].constant));
    assert!(r.levels.iter().all(|l| l.constant >= 0.25 - 1e-6 && l.residual <= 1e-8 && l.ground_state_positive));
    assert!(r.flags.is_empty(), "{:?}", r.flags);
    // log-mesh fit: the estimate falls as h shrinks
    assert!(r.fit.unwrap().slope > 0.0);
}

#[test]
fn boundary_interior_gap_in_two_dimensions() {
    let start = Instant::now();
    let p = PolarSpec { rings: 200, angles: 128, r_min: 1e-6, r_max_fraction: 0.999 };
    let level = [LevelSpec::Polar(p)];
    let b = hardy_study(HardyCase { placement: Placement::Boundary, dim: 2, size: 1.0 }, &level, 2.0, 0.0).unwrap();
    let i = hardy_study(HardyCase { placement: Placement::Interior, dim: 2, size: 1.0 }, &level, 2.0, 0.0).unwrap();
    let (mb, mi) = (b.finest().unwrap(), i.finest().unwrap());
    assert!(mb.dofs <= 50_000 && mi.dofs <= 50_000);
    assert!(mb.constant > 0.5, "{mb:?}");
    assert!(mi.constant < 0.15, "{mi:?}");
    assert!(mb.constant - mi.constant >= 0.35);
    assert!(mb.constant >= critical_mu(2) - 1e-6);
    assert!(mb.residual <= 1e-8 && mi.residual <= 1e-8);
    assert!(start.elapsed().as_secs() <= 120);
}

#[test]
fn shift_is_finite_at_desk_meshes_and_recorded_under_refinement() {
    let mut c0 = Vec::new();
    for cells in [100, 200, 400, 800] {
        let e = estimate_c0_gamma(&interval(cells), 1.5, 0.25, Bisection::default()).unwrap();
        assert!(e.c0.is_finite() && e.c0 > 0.0);
        assert!(e.nu_at_c0 >= 1.0 - 1e-9 && e.residual <= 1e-8);
        c0.push(e.c0);
    }
    // The discrete Hardy constant exceeds 1/4 on coarse meshes, so less shift is needed there.
    assert!(c0.windows(2).all(|w| w[1] >= w[0]), "{c0:?}");
}

#[test]
fn inequalities_hold_on_gaussian_fields() {
    let disc = interval(400);
    let mu_n = critical_mu(1);
    let shift = estimate_c0_gamma(&disc, 1.5, mu_n, Bisection::default()).unwrap();
    let ctx = InequalityContext::new(&disc, 1.5, mu_n).unwrap();
    let r = check_inequality(&ctx, Inequality::GammaHardy { c1: shift.c0 + 1e-3 }, 500, 100);
    assert!(r.pass(), "{r:?}");
    assert_eq!(r.fields, 500);

    let sweep = sweep_c2_c3(&disc, 1.5, 0.2, &[0.25, 0.5, 1.0, 2.0], Bisection::default()).unwrap();
    assert!(sweep.rows.last().unwrap().c2.is_none());
    let (c3, c2) = sweep.best.unwrap();
    let ctx = InequalityContext::new(&disc, 1.5, 0.2).unwrap();
    let r = check_inequality(&ctx, Inequality::WeightedCoercivity { c2, c3 }, 500, 9_000);
    assert!(r.pass(), "{r:?}");

    for mu in [0.25, 0.2, 0.0, -0.3] {
        let ctx = InequalityContext::new(&disc, 1.5, mu).unwrap();
        let r = check_inequality(&ctx, Inequality::NormEquivalence { c0: shift.c0 }, 500, 42);
        assert!(r.pass(), "mu {mu}: {r:?}");
    }
}

#[test]
fn supersolution_margins_are_nonnegative_in_one_and_two_dimensions() {
    for g in [geometry::DomainGeometry::interval(1.0).unwrap(), geometry::DomainGeometry::tangent_disk(2.0).unwrap()] {
        let r = appendix_phi_check(&g, PhiCheckOptions::default()).unwrap();
        assert_eq!(r.samples.len(), 200);
        assert!(r.pass(), "N = {}: {} failures", r.dim, r.failures);
        assert!(r.fitted_constant > 0.0);
        let ctrl = appendix_phi_check(&g, PhiCheckOptions { suppress_distance: true, ..Default::default() }).unwrap();
        assert!(!ctrl.pass());
    }
}

fn dense_quotient_min(disc: &Discretization) -> f64 {
    let k = disc.stiffness();
    let w = disc.weighted_mass(2.0);
    let n = disc.len();
    SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| k.get(i, j) / (w[i] * w[j]).sqrt())).eigenvalues.min()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn discrete_constant_dominates_the_continuum_value(cells in 8usize..160) {
        let disc = interval(cells);
        let est = best_hardy_constant(&disc, 2.0, 0.0).unwrap();
        prop_assert!(est.constant >= 0.25 - 1e-6);
        prop_assert!((est.constant - dense_quotient_min(&disc)).abs() < 1e-9);
    }

    #[test]
    fn rayleigh_quotient_never_beats_the_constant(seed in any::<u64>(), cells in 8usize..200) {
        let disc = interval(cells);
        let est = best_hardy_constant(&disc, 2.0, 0.0).unwrap();
        let ctx = InequalityContext::new(&disc, 1.0, 0.0).unwrap();
        let f = ctx.forms(&gaussian_field(disc.len(), seed));
        prop_assert!(f.grad / f.inv_sq >= est.constant * (1.0 - 1e-12));
    }
}
