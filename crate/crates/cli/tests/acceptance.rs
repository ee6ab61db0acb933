//! End-to-end acceptance criteria. Each test prints one `criterion N` line
//! with its verdict before asserting.

use std::path::{Path, PathBuf};
use std::time::Instant;

use carleman_audit::{t_terms, AuditOptions, Auditor, CheckId, DEFAULT_LAMBDA_GRID};
use control::{hum_control, ControlProblem, HumOptions};
use geometry::{DomainGeometry, Regions, SubsetShape};
use hardy::{appendix_phi_check, hardy_study, HardyCase, LevelSpec, PhiCheckOptions, Placement};
use nalgebra::DVector;
use pde::{
    blowup_experiment, effective_rate, energy_monotonicity_check, solve_adjoint, BlowupConfig, Dichotomy, Discretization, Mesh, PolarSpec,
    Propagator, Record, Scheme, TimeGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weights::{build_psi, R0Inputs, WeightConfig, WeightParams};

fn verdict(n: u32, name: &str, pass: bool, details: &str) {
    println!("criterion {n} {name}: {} ({details})", if pass { "PASS" } else { "FAIL" });
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}

fn disk() -> (DomainGeometry, Regions) {
    let g = DomainGeometry::tangent_disk(2.0).unwrap();
    let c = DVector::from_vec(vec![0.0, 2.0]);
    let r = Regions::new(&g, SubsetShape::Ball { center: c.clone(), radius: 0.8 }, SubsetShape::Ball { center: c, radius: 0.5 }).unwrap();
    (g, r)
}

#[test]
fn criterion_1_hardy_constants() {
    let start = Instant::now();
    let polar = [LevelSpec::Polar(PolarSpec { rings: 200, angles: 128, r_min: 1e-6, r_max_fraction: 0.999 })];
    let (b, i) = rayon::join(
        || hardy_study(HardyCase { placement: Placement::Boundary, dim: 2, size: 1.0 }, &polar, 2.0, 0.0).unwrap(),
        || hardy_study(HardyCase { placement: Placement::Interior, dim: 2, size: 1.0 }, &polar, 2.0, 0.0).unwrap(),
    );
    let levels: Vec<LevelSpec> = [100, 200, 400, 800, 1600].iter().map(|&cells| LevelSpec::Interval { cells }).collect();
    let one = hardy_study(HardyCase { placement: Placement::Boundary, dim: 1, size: 1.0 }, &levels, 2.0, 0.0).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let (mb, mi) = (b.finest().unwrap(), i.finest().unwrap());
    let f1 = one.finest().unwrap();
    let decreasing = one.levels.len() == 5 && one.levels.windows(2).all(|w| w[1].constant < w[0].constant);
    let pass = mb.constant > 0.5
        && mi.constant < 0.15
        && mb.constant - mi.constant >= 0.35
        && mb.dofs <= 50_000
        && mi.dofs <= 50_000
        && (f1.h - 1.0 / 1600.0).abs() < 1e-15
        && (0.25..=0.40).contains(&f1.constant)
        && decreasing
        && elapsed <= 120.0;
    verdict(
        1,
        "hardy constants",
        pass,
        &format!(
            "2-D boundary {:.4}, interior {:.4}, gap {:.4}, dofs {}/{}; 1-D finest {:.4}, decreasing {decreasing}; {elapsed:.1}s",
            mb.constant,
            mi.constant,
            mb.constant - mi.constant,
            mb.dofs,
            mi.dofs,
            f1.constant
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_disk_audit() {
    let start = Instant::now();
    let (g, r) = disk();
    let kit = build_psi(&g, &r).unwrap();
    let params = WeightParams { lambda: DEFAULT_LAMBDA_GRID[0], s: 1.0, gamma: 1.5, horizon: 0.5, c3: 0.5, mu: 0.2 };
    let w = WeightConfig::from_recipes(&g, kit, params, None).unwrap();
    let a = Auditor::new(&g, &r, w, AuditOptions::default()).unwrap();
    let found = a.find_lambda0(&DEFAULT_LAMBDA_GRID).unwrap();
    let rep = &found.report;

    let w0 = a.weights_at(found.lambda0).unwrap();
    let residual = a.samples().interior.iter().map(|x| t_terms(&w0, x).identity_residual()).fold(0.0, f64::max);
    let violations: usize = rep.records.iter().map(|r| r.violations).sum();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = DEFAULT_LAMBDA_GRID.contains(&found.lambda0)
        && rep.records.len() == CheckId::ALL.len()
        && violations == 0
        && rep.sample_count >= 10_000
        && residual <= 1e-9
        && elapsed <= 60.0;
    verdict(
        2,
        "disk audit",
        pass,
        &format!(
            "lambda0 {}, {} checks, {} samples, {violations} violations, identity residual {residual:.2e}; {elapsed:.1}s",
            found.lambda0,
            rep.records.len(),
            rep.sample_count
        ),
    );
    assert!(pass);
}

/// Largest normalized mismatch between analytic and central-difference derivatives.
struct FdStats {
    worst: f64,
    points: usize,
}

impl FdStats {
    fn push(&mut self, fd: f64, an: f64, tol: f64) {
        self.worst = self.worst.max((fd - an).abs() / tol);
    }
}

fn bump(x: &DVector<f64>, i: usize, h: f64) -> (DVector<f64>, DVector<f64>) {
    let mut p = x.clone();
    let mut m = x.clone();
    p[i] += h;
    m[i] -= h;
    (p, m)
}

#[test]
fn criterion_3_derivatives_and_recipes() {
    let (g, r) = disk();
    let kit = build_psi(&g, &r).unwrap();

    // Recipe values recomputed clause by clause from the kit's sampled constants.
    let d0 = kit.delta0();
    let delta = [
        1.0,
        2.0 * (2.0 * g.tangency_constant()) / d0,
        24.0 * kit.d_omega() * g.r_omega().powi(2) / (d0 * d0),
        2.0 / d0,
        (1.0 + 4.0 * kit.d_omega() + kit.dpsi1_sup() + 2.0 * kit.d2psi1_sup()) / (d0 * d0),
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);
    let (gamma, mu, c3) = (1.5, 0.2, 0.5);
    let inp = R0Inputs::from_kit(&kit, gamma, mu, c3);
    let (a, b, p) = (inp.dpsi_sup, inp.d2psi_sup, inp.psi_sup);
    let e = 1.0 / (gamma - 1.0);
    let r0 = [
        1.0,
        inp.beta0 / 2.0,
        1.0 / ((2.0 - gamma) * (a + b)),
        1.0 / (2.0 * (3.0 * a * a + b)).sqrt(),
        1.0 / (a * (8.0 * p * p + 2.0).sqrt()),
        (c3 / (8.0 * a * a + 8.0 * b)).powf(e),
        (c3 / (mu * a)).powf(e),
        1.0 / (3.0 * a).sqrt(),
        1.0 / (2.0 * p * a),
        1.0 / (8.0 * inp.d_omega * a / inp.delta0 + 3.0 * b).sqrt(),
        2.0 / (4.0 * a + b),
    ]
    .into_iter()
    .map(|v| if v.is_nan() { f64::INFINITY } else { v })
    .fold(f64::INFINITY, f64::min);
    let params = WeightParams { lambda: 8.0, s: 1.0, gamma, horizon: 0.5, c3, mu };
    let recipe = WeightConfig::from_recipes(&g, kit.clone(), params, None).unwrap();
    let recipes_ok = kit.delta() == delta && recipe.r0() == r0;

    // Moderate constants keep tau and sigma within double range for differencing.
    let kit = kit.with_delta(1.0).unwrap();
    let params = WeightParams { lambda: 8.0, s: 1.0, gamma, horizon: 1.0, c3: 1.0, mu: 0.5 };
    let w = WeightConfig::from_recipes(&g, kit.clone(), params, Some(0.3)).unwrap();
    let c = w.c_lambda().value();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut psi, mut tau, mut sigma) =
        (FdStats { worst: 0.0, points: 0 }, FdStats { worst: 0.0, points: 0 }, FdStats { worst: 0.0, points: 0 });
    while psi.points < 1000 {
        let x = g.sample_interior(&mut rng);
        let t = rng.gen_range(0.02..0.98);

        let j = kit.psi(&x);
        for i in 0..2 {
            let (xp, xm) = bump(&x, i, 1e-5);
            let (jp, jm) = (kit.psi(&xp), kit.psi(&xm));
            let fd = (jp.value - jm.value) / 2e-5;
            psi.push(fd, j.grad[i], 1e-6 * (1.0 + fd.abs()));
            for k in 0..2 {
                let fd = (jp.grad[k] - jm.grad[k]) / 2e-5;
                psi.push(fd, j.hess[(i, k)], 1e-5 * (1.0 + fd.abs()));
            }
        }
        psi.points += 1;

        if x.norm() < 1e-3 {
            continue;
        }
        let h = 1e-6 * x.norm();
        let te = w.tau_eval(&x);
        let scale = te.hess_x2.norm() + te.hess_phi.norm();
        let s = w.sigma_eval(t, &x, false).unwrap();
        let th = w.theta(t).unwrap();
        for i in 0..2 {
            let (xp, xm) = bump(&x, i, h);
            let (tp, tm) = (w.tau_eval(&xp), w.tau_eval(&xm));
            for (fd, an) in [((tp.tau_x2 - tm.tau_x2) / (2.0 * h), te.grad_x2[i]), ((tp.tau_phi - tm.tau_phi) / (2.0 * h), te.grad_phi[i])]
            {
                tau.push(fd, an, 1e-6 * (fd.abs() + an.abs()) + 1e-9);
            }
            for k in 0..2 {
                for (fd, an) in [
                    ((tp.grad_x2[k] - tm.grad_x2[k]) / (2.0 * h), te.hess_x2[(i, k)]),
                    ((tp.grad_phi[k] - tm.grad_phi[k]) / (2.0 * h), te.hess_phi[(i, k)]),
                ] {
                    tau.push(fd, an, 1e-6 * scale + 1e-9);
                }
            }
            let sp = w.sigma_eval(t, &xp, false).unwrap();
            let sm = w.sigma_eval(t, &xm, false).unwrap();
            let fd = (sp.sigma - sm.sigma) / (2.0 * h);
            sigma.push(fd, s.grad[i], 1e-6 * (fd.abs() + s.grad.norm()) + 1e-15 * th * c / h);
            for k in 0..2 {
                let fd = (sp.grad[k] - sm.grad[k]) / (2.0 * h);
                sigma.push(fd, s.hess[(i, k)], 1e-6 * th * scale + 1e-15 * th * s.grad.norm() / h + 1e-9);
            }
        }
        let ht = 1e-6;
        let fd = (w.sigma_eval(t + ht, &x, false).unwrap().sigma - w.sigma_eval(t - ht, &x, false).unwrap().sigma) / (2.0 * ht);
        sigma.push(fd, s.dt, 1e-6 * (fd.abs() + s.dt.abs()) + 1e-15 * s.sigma / ht);
        tau.points += 1;
        sigma.points += 1;
    }
    let pass = recipes_ok && psi.worst <= 1.0 && tau.worst <= 1.0 && sigma.worst <= 1.0;
    verdict(
        3,
        "derivatives and recipes",
        pass,
        &format!(
            "delta {} and r0 {:.3e} recomputed exactly: {recipes_ok}; worst mismatch/tolerance psi {:.2e} ({} pts), tau {:.2e} ({} pts), sigma {:.2e} ({} pts)",
            delta, r0, psi.worst, psi.points, tau.worst, tau.points, sigma.worst, sigma.points
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_blowup_dichotomy() {
    let start = Instant::now();
    let cfg = BlowupConfig::default();
    let (sub, sup) = rayon::join(|| blowup_experiment(0.2, &cfg).unwrap(), || blowup_experiment(0.35, &cfg).unwrap());
    let elapsed = start.elapsed().as_secs_f64();
    let ratios = |r: &pde::BlowupReport| r.levels.iter().filter_map(|l| l.ratio()).collect::<Vec<f64>>();
    let (rs, rb) = (ratios(&sub), ratios(&sup));
    let pass = sub.levels.len() == 4
        && sup.levels.len() == 4
        && sub.classification == Dichotomy::Stable
        && rs.iter().all(|&v| v <= 1.05)
        && sup.classification == Dichotomy::BlowUpTrend
        && rb.iter().all(|&v| v >= 10.0)
        && elapsed <= 60.0;
    verdict(
        4,
        "blow-up dichotomy",
        pass,
        &format!(
            "mu 0.2 {} ratios {rs:.4?}; mu 0.35 {} ratios {}; {elapsed:.1}s",
            sub.classification.as_str(),
            sup.classification.as_str(),
            sci(&rb)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_null_control() {
    let start = Instant::now();
    let h = 1.0 / 256.0;
    let disc = Discretization::new(Mesh::interval(1.0, 256).unwrap()).unwrap();
    let u0 = disc.mesh().interpolate(|x| (std::f64::consts::PI * x[0]).sin());
    let p = ControlProblem::new(&disc, 0.2, Scheme::ImplicitEuler, 0.5, h, &SubsetShape::Interval { a: 0.6, b: 0.8 }).unwrap();
    let runs: Vec<_> =
        [1e-2, 1e-4, 1e-6].iter().map(|&eps| hum_control(&p, &u0, HumOptions { epsilon: eps, ..HumOptions::default() }).unwrap()).collect();
    let terminal: Vec<f64> = runs.iter().map(|r| r.terminal_norm).collect();
    let monotone = terminal.windows(2).all(|w| w[1] < w[0]);
    let relative = runs[2].relative_terminal_norm();

    let mut rng = ChaCha8Rng::seed_from_u64(0xc0);
    let mut symmetry: f64 = 0.0;
    for _ in 0..4 {
        let a: Vec<f64> = (0..p.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..p.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lhs = p.inner(&p.gramian_apply(&a).unwrap(), &b);
        let rhs = p.inner(&a, &p.gramian_apply(&b).unwrap());
        symmetry = symmetry.max((lhs - rhs).abs() / (p.norm(&a) * p.norm(&b)));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = relative < 1e-2 && monotone && symmetry < 1e-10 && elapsed <= 120.0;
    verdict(
        5,
        "null control",
        pass,
        &format!(
            "relative terminal norm {relative:.3e} at eps 1e-6, terminal norms {}, gramian symmetry {symmetry:.1e}; {elapsed:.1}s",
            sci(&terminal)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_energy_monotonicity() {
    let one = Discretization::new(Mesh::interval(1.0, 256).unwrap()).unwrap();
    let two =
        Discretization::new(Mesh::tangent_disk(2.0, PolarSpec { rings: 24, angles: 24, r_min: 1e-3, r_max_fraction: 0.999 }).unwrap())
            .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xe6);
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, disc, mus) in [("1-D", &one, [0.0, 0.2, 0.25]), ("2-D", &two, [0.0, 0.5, 0.9])] {
        for mu in mus {
            for scheme in [Scheme::ImplicitEuler, Scheme::CrankNicolson] {
                let grid = TimeGrid::new(0.5, 500).unwrap();
                let prop = Propagator::new(disc, mu, scheme, grid.dt()).unwrap();
                let rate = effective_rate(&prop).unwrap();
                let w_t: Vec<f64> = (0..disc.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let traj = solve_adjoint(&prop, &w_t, grid, Record::NormsOnly).unwrap();
                let r = energy_monotonicity_check(&traj, rate.c).unwrap();
                pass &= r.pass();
                lines.push(format!("{name} mu {mu} {}: {}", scheme.as_str(), r.pass()));
            }
        }
    }
    verdict(6, "energy monotonicity", pass, &lines.join(", "));
    assert!(pass);
}

#[test]
fn criterion_7_supersolution() {
    let mut lines = Vec::new();
    let mut pass = true;
    for g in [DomainGeometry::interval(1.0).unwrap(), DomainGeometry::tangent_disk(2.0).unwrap()] {
        let r = appendix_phi_check(&g, PhiCheckOptions::default()).unwrap();
        let min = r.min_margin();
        let ok = r.samples.len() == 200 && r.failures == 0 && min >= 0.0 && r.fitted_constant > 0.0;
        pass &= ok;
        lines.push(format!("N={}: {} samples, min margin {min:.3e}, fit {:.4}", r.dim, r.samples.len(), r.fitted_constant));
    }
    verdict(7, "supersolution", pass, &lines.join("; "));
    assert!(pass);
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name).to_string_lossy().into_owned()
}

fn run_cli(args: &[&str], out: &Path) -> i32 {
    let mut argv = vec!["singular-heat"];
    argv.extend_from_slice(args);
    let out = out.to_string_lossy().into_owned();
    argv.extend_from_slice(&["--out", &out]);
    cli::run(argv)
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p: PathBuf| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_8_cli_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let interval = scenario("interval_control.json");
    let disk = scenario("tangent_disk.json");
    let mut codes = Vec::new();
    let mut identical = true;
    let mut counts = Vec::new();
    for (label, args) in
        [("report", vec!["report", "--config", interval.as_str()]), ("audit-weights", vec!["audit-weights", "--config", disk.as_str()])]
    {
        let (a, b) = (tmp.path().join(format!("{label}-1")), tmp.path().join(format!("{label}-4")));
        let mut one = args.clone();
        one.extend_from_slice(&["--workers", "1"]);
        let mut four = args.clone();
        four.extend_from_slice(&["--workers", "4"]);
        codes.push(run_cli(&one, &a));
        codes.push(run_cli(&four, &b));
        let (fa, fb) = (csv_files(&a), csv_files(&b));
        identical &= !fa.is_empty() && fa == fb;
        counts.push(format!("{label} {} files", fa.len()));
    }
    let pass = identical && codes.iter().all(|&c| c == 0);
    verdict(
        8,
        "cli determinism",
        pass,
        &format!("exit codes {codes:?}, byte-identical across 1 and 4 workers: {identical} ({})", counts.join(", ")),
    );
    assert!(pass);
}
