use std::time::Instant;

use control::*;
use geometry::SubsetShape;
use pde::{Discretization, Mesh, Scheme};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1.0 / 256.0;

fn interval(cells: usize) -> Discretization {
    Discretization::new(Mesh::interval(1.0, cells).unwrap()).unwrap()
}

fn omega(a: f64, b: f64) -> SubsetShape {
    SubsetShape::Interval { a, b }
}

fn sine(disc: &Discretization) -> Vec<f64> {
    disc.mesh().interpolate(|x| (std::f64::consts::PI * x[0]).sin())
}

fn random(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn gramian_symmetry(p: &ControlProblem, rng: &mut ChaCha8Rng) -> f64 {
    let a = random(p.len(), rng);
    let b = random(p.len(), rng);
    let lhs = p.inner(&p.gramian_apply(&a).unwrap(), &b);
    let rhs = p.inner(&a, &p.gramian_apply(&b).unwrap());
    (lhs - rhs).abs() / (p.norm(&a) * p.norm(&b))
}

#[test]
fn null_control_at_desk_scale() {
    let start = Instant::now();
    let disc = interval(256);
    let u0 = sine(&disc);
    for mu in [0.0, 0.2] {
        let p = ControlProblem::new(&disc, mu, Scheme::ImplicitEuler, 0.5, H, &omega(0.6, 0.8)).unwrap();
        let mut last = f64::INFINITY;
        for eps in [1e-2, 1e-4, 1e-6] {
            let r = hum_control(&p, &u0, HumOptions { epsilon: eps, ..HumOptions::default() }).unwrap();
            assert!(r.terminal_norm < last, "mu {mu} eps {eps}: {} after {last}", r.terminal_norm);
            assert!(r.terminal_audit_ok(), "{} vs {} + {}", r.terminal_norm, eps * r.adjoint_norm, r.cg_residual);
            last = r.terminal_norm;
            if eps == 1e-6 {
                assert!(r.relative_terminal_norm() < 1e-2, "mu {mu}: {}", r.relative_terminal_norm());
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        assert!(gramian_symmetry(&p, &mut rng) < 1e-10);
    }
    assert!(start.elapsed().as_secs() <= 120);
}

#[test]
fn gramian_is_symmetric_and_semidefinite_on_random_probes() {
    let disc = interval(64);
    let p = ControlProblem::new(&disc, 0.2, Scheme::CrankNicolson, 0.3, 1.0 / 64.0, &omega(0.6, 0.8)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        assert!(gramian_symmetry(&p, &mut rng) < 1e-10);
        let a = random(p.len(), &mut rng);
        let obs = p.observe(&a).unwrap();
        let q = p.inner(&p.gramian_apply(&a).unwrap(), &a);
        assert!(q >= 0.0);
        assert!((q - p.control_energy(&obs.controls)).abs() <= 1e-12 * q);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn gramian_symmetry_for_random_setups(seed in any::<u64>(), mu in -0.5f64..0.25, a in 0.1f64..0.6, cn in any::<bool>()) {
        let disc = interval(32);
        let scheme = if cn { Scheme::CrankNicolson } else { Scheme::ImplicitEuler };
        let p = ControlProblem::new(&disc, mu, scheme, 0.2, 1.0 / 32.0, &omega(a, a + 0.3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(gramian_symmetry(&p, &mut rng) < 1e-10);
    }
}

#[test]
fn controls_are_supported_in_omega() {
    let disc = interval(128);
    let p = ControlProblem::new(&disc, 0.1, Scheme::ImplicitEuler, 0.3, 1.0 / 128.0, &omega(0.6, 0.8)).unwrap();
    let r = hum_control(&p, &sine(&disc), HumOptions { epsilon: 1e-4, ..HumOptions::default() }).unwrap();
    for g in &r.control {
        for (v, m) in g.iter().zip(p.mask()) {
            if *m == 0.0 {
                assert_eq!(*v, 0.0);
            }
        }
    }
    assert!(r.control.iter().flatten().any(|&v| v != 0.0));
}

#[test]
fn observability_is_monotone_in_the_set_and_the_horizon() {
    let disc = interval(64);
    let c = |a: f64, b: f64, t: f64, mu: f64| {
        let p = ControlProblem::new(&disc, mu, Scheme::ImplicitEuler, t, 1.0 / 64.0, &omega(a, b)).unwrap();
        let e = observability_constant(&p).unwrap();
        assert!(e.residual < 1e-6, "{e:?}");
        e.constant
    };
    let tol = 1e-6;
    assert!(c(0.5, 0.9, 0.5, 0.0) <= c(0.6, 0.8, 0.5, 0.0) * (1.0 + tol));
    assert!(c(0.6, 0.8, 0.25, 0.0) >= c(0.6, 0.8, 0.5, 0.0) * (1.0 - tol));
    let by_mu: Vec<f64> = [0.0, 0.1, 0.2, 0.24].iter().map(|&mu| c(0.6, 0.8, 0.5, mu)).collect();
    assert!(by_mu.windows(2).all(|w| w[1] >= w[0] * (1.0 - tol)), "{by_mu:?}");
}

#[test]
fn cost_scans_complete() {
    let disc = interval(64);
    let cfg = ScanConfig {
        mu: 0.0,
        horizon: 0.5,
        dt_max: 1.0 / 64.0,
        scheme: Scheme::ImplicitEuler,
        omega: omega(0.6, 0.8),
        hum: HumOptions { epsilon: 1e-4, ..HumOptions::default() },
        initial: sine(&disc),
    };
    let rows = cost_scan(&disc, &cfg, ScanParameter::Mu, &[0.0, 0.1, 0.2, 0.24]);
    assert!(rows.iter().all(|r| r.outcome.is_ok()));
    let rows = cost_scan(&disc, &cfg, ScanParameter::Horizon, &[0.25, 0.5, 1.0]);
    let c: Vec<f64> = rows.iter().map(|r| r.outcome.as_ref().unwrap().observability).collect();
    assert!(c.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-6)), "{c:?}");
}
