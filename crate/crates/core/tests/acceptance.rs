//! Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! The first three criteria and the lambda check run the full 400 x 400 reference
//! in memory (about 1 GB per initial condition, roughly a minute in total).

mod common;

use std::f64::consts::PI;
use std::fs;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{monomial_integral, random_system, random_triangle, rel_diff};
use wavebench::benchmark::{run_benchmark, run_with_reference, write_csv, BenchmarkReport};
use wavebench::config::ExperimentConfig;
use wavebench::dof::match_cn_to_dof;
use wavebench::fem::{cn_solve, cn_solve_streaming, discrete_energy, CnVariant, FemSystem, StartRule};
use wavebench::mesh::Mesh;
use wavebench::metrics::{
    mesh_quadrature_points, simpson_weights, triangle_quadrature_integral, triangle_quadrature_points, SimpsonRule,
    SpaceTimeField,
};
use wavebench::problem::{InitialCondition, WaveProblem};
use wavebench::reference::{compute_reference, ReferenceSpec};
use wavebench::spectral::{fit_initial_condition, RidgeFit, SpectralModel};

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn pct(v: f64) -> String {
    format!("{:.2}%", 100.0 * v)
}

fn within(v: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&v)
}

struct FullScaleRun {
    report: BenchmarkReport,
    model: SpectralModel,
}

fn full_scale_run(ic: InitialCondition) -> FullScaleRun {
    let cfg = ExperimentConfig::default().paper_scale().with_ic(ic);
    let reference = compute_reference(&ReferenceSpec::from_config(&cfg)).expect("reference");
    let run = run_with_reference(&cfg, &reference).expect("benchmark");
    FullScaleRun { report: run.report, model: run.model }
}

fn table_one(id: &'static str, r: &BenchmarkReport, ep_max: f64, cn_band: (f64, f64), min_gain: f64) -> Outcome {
    let pass = r.ep.st_rel <= ep_max && within(r.cn.st_rel, cn_band.0, cn_band.1) && r.improvement.st_l2 >= min_gain;
    Outcome {
        id,
        pass,
        detail: format!(
            "{}: B-EPGP st rel {} (<= {}), CN-FEM st rel {} (in [{}, {}]), improvement {:.1}x (>= {min_gain}x)",
            r.ic,
            pct(r.ep.st_rel),
            pct(ep_max),
            pct(r.cn.st_rel),
            pct(cn_band.0),
            pct(cn_band.1),
            r.improvement.st_l2
        ),
    }
}

fn table_two(poly: &BenchmarkReport, moll: &BenchmarkReport) -> Outcome {
    let checks = [(poly, 0.005, (0.28, 0.45)), (moll, 0.04, (0.65, 0.95))];
    let pass = checks.iter().all(|(r, ep, band)| r.ep.linf_rel <= *ep && within(r.cn.linf_rel, band.0, band.1));
    let detail = checks
        .iter()
        .map(|(r, ep, band)| {
            format!(
                "{}: B-EPGP linf rel {} (<= {}), CN-FEM linf rel {} (in [{}, {}])",
                r.ic,
                pct(r.ep.linf_rel),
                pct(*ep),
                pct(r.cn.linf_rel),
                pct(band.0),
                pct(band.1)
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { id: "3", pass, detail }
}

fn dof_matching(poly: &BenchmarkReport) -> Outcome {
    let start = Instant::now();
    let m = match_cn_to_dof(1600.0, 1.0).expect("match");
    let secs = start.elapsed().as_secs_f64();
    let pass = (poly.edof - 1600.0).abs() <= 5.0
        && m.n == 12
        && m.dt == 1.0 / 12.0
        && m.nt == 12
        && m.dof_cn == 1573
        && secs < 1.0;
    Outcome {
        id: "4",
        pass,
        detail: format!(
            "edof at lambda* {:.3} (1600 +- 5); match(1600) -> n = {}, dt = {}, DoF = {} in {:.1e} s",
            poly.edof, m.n, m.dt, m.dof_cn, secs
        ),
    }
}

fn lambda_recovery(runs: &[(&FullScaleRun, f64)]) -> Outcome {
    let cfg = ExperimentConfig::default();
    let step = 1.0 / cfg.lambda_grid.per_decade as f64;
    let mut pass = true;
    let mut parts = Vec::new();
    for (run, target) in runs {
        let dist = (run.model.lambda / target).log10().abs();
        let mut ok = dist <= step + 1e-12;
        let mut note = format!("{}: lambda* {:.3e} vs {target:.2e}, {:.3} grid steps", run.report.ic, run.model.lambda, dist / step);
        if !ok {
            let ic = if run.report.ic == "polynomial" { InitialCondition::Polynomial } else { InitialCondition::mollifier() };
            let c = cfg.clone().with_ic(ic);
            let (_, fit) = fit_initial_condition(&c.problem, &c.fit_settings().unwrap()).unwrap();
            let at_target = fit.gcv_score(*target).unwrap();
            ok = run.model.diagnostics.gcv_score <= 1.01 * at_target;
            note.push_str(&format!(", GCV {:.4e} vs {:.4e} at target", run.model.diagnostics.gcv_score, at_target));
        }
        pass &= ok;
        parts.push(note);
    }
    Outcome { id: "5", pass, detail: parts.join("; ") }
}

fn analytic_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig::default().with_ic(InitialCondition::SingleMode);
    let (model, _) = fit_initial_condition(&cfg.problem, &cfg.fit_settings().unwrap()).unwrap();
    let problem = &cfg.problem;
    let mesh = Mesh::structured(1.0, 1.0, 50, 50).unwrap();
    let points = mesh_quadrature_points(&mesh);
    let weights = simpson_weights(200, 1.0, SimpsonRule::Standard).unwrap();
    let mut u = vec![0.0; points.len()];
    let mut err2 = 0.0;
    for (n, w) in weights.iter().enumerate() {
        let t = n as f64 / 200.0;
        model.eval_points(&points, t, &mut u).unwrap();
        err2 += w * points
            .iter()
            .zip(&u)
            .map(|(q, v)| q.weight * (v - problem.exact(q.x, q.y, t).unwrap()).powi(2))
            .sum::<f64>();
    }
    let ep_err = err2.sqrt();

    let errors: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| {
            let sys = FemSystem::for_problem(problem, n, n).unwrap();
            let u0 = sys.mesh.sample_interior(|x, y| problem.u0(x, y));
            let traj = cn_solve(&sys, &u0, 1.0 / n as f64, n, CnVariant::Centered, StartRule::Taylor).unwrap();
            let omega = PI * 2f64.sqrt();
            triangle_quadrature_integral(
                |x, y| (traj.eval(x, y, 1.0).unwrap() - (PI * x).sin() * (PI * y).sin() * omega.cos()).powi(2),
                &sys.mesh,
            )
            .sqrt()
        })
        .collect();
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let secs = start.elapsed().as_secs_f64();
    let pass = ep_err <= 1e-6 && orders.iter().all(|&o| within(o, 1.7, 2.3)) && secs < 30.0;
    Outcome {
        id: "6",
        pass,
        detail: format!(
            "B-EPGP space-time error {ep_err:.2e} (<= 1e-6); CN-FEM orders {:.3}, {:.3} (in [1.7, 2.3]); {secs:.1} s (< 30 s)",
            orders[0], orders[1]
        ),
    }
}

fn energy_conservation() -> Outcome {
    let p = WaveProblem::unit_square(InitialCondition::SingleMode);
    let sys = FemSystem::for_problem(&p, 16, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for case in 0..16 {
        let dt = if case == 0 { 1.0 / 16.0 } else { rng.random_range(0.005..1.0) };
        let (a, b) = (rng.random_range(0.1..5.0), rng.random_range(-1.0..1.0));
        let u0 = sys.mesh.sample_interior(|x, y| a * p.u0(x, y) + b * (2.0 * PI * x).sin() * (3.0 * PI * y).sin());
        let mut prev: Option<Vec<f64>> = None;
        let mut energies = Vec::new();
        cn_solve_streaming(&sys, &u0, dt, 1000, CnVariant::Centered, StartRule::Taylor, |_, u| {
            if let Some(pv) = &prev {
                energies.push(discrete_energy(&sys, pv, u, dt)?);
            }
            prev = Some(u.to_vec());
            Ok(())
        })
        .unwrap();
        let drift = energies.iter().map(|e| (e - energies[0]).abs()).fold(0.0, f64::max) / energies[0];
        worst = worst.max(drift);
    }
    Outcome { id: "7", pass: worst <= 1e-10, detail: format!("max relative drift {worst:.2e} over 16 cases x 1000 steps (<= 1e-10)") }
}

fn kernel_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);

    let mut quad = 0.0f64;
    for _ in 0..500 {
        let tri = random_triangle(&mut rng);
        let pts = triangle_quadrature_points(tri);
        for a in 0..=3 {
            for b in 0..=(3 - a) {
                let q: f64 = pts.iter().map(|q| q.weight * q.x.powi(a) * q.y.powi(b)).sum();
                quad = quad.max((q - monomial_integral(tri, a, b)).abs());
            }
        }
    }

    let mut simpson = 0.0f64;
    for _ in 0..200 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
        let nt = 2 * rng.random_range(1..60);
        let tf = rng.random_range(0.1..3.0);
        let w = simpson_weights(nt, tf, SimpsonRule::Standard).unwrap();
        let f = |t: f64| c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t;
        let approx: f64 = w.iter().enumerate().map(|(i, wi)| wi * f(tf * i as f64 / nt as f64)).sum();
        let exact = c[0] * tf + c[1] * tf.powi(2) / 2.0 + c[2] * tf.powi(3) / 3.0 + c[3] * tf.powi(4) / 4.0;
        simpson = simpson.max((approx - exact).abs() / (1.0 + exact.abs()));
    }

    let (mut ridge, mut gcv) = (0.0f64, 0.0f64);
    for &(m, p) in &[(20, 5), (60, 60), (120, 80), (200, 100), (50, 90)] {
        let (phi, y, dense) = random_system(&mut rng, m, p);
        let fit = RidgeFit::new(&phi, &y).unwrap();
        let yv = DVector::from_vec(y.clone());
        for &lambda in &[1e-3, 0.1, 1.0, 10.0] {
            let gram = dense.transpose() * &dense + DMatrix::identity(p, p) * lambda;
            let oracle = gram.cholesky().unwrap().solve(&(dense.transpose() * &yv));
            ridge = ridge.max(rel_diff(&fit.weights(lambda).unwrap(), oracle.as_slice()));

            // Dense I - H written as lambda (Phi Phi^T + lambda I)^{-1}.
            let resolvent = (&dense * dense.transpose() + DMatrix::identity(m, m) * lambda).try_inverse().unwrap();
            let resid = &resolvent * &yv * lambda;
            let denom = lambda * resolvent.trace();
            let oracle = resid.norm_squared() / (denom * denom);
            gcv = gcv.max((fit.gcv_score(lambda).unwrap() - oracle).abs() / oracle);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = quad <= 1e-14 && simpson <= 1e-13 && ridge <= 1e-10 && gcv <= 1e-10 && secs < 10.0;
    Outcome {
        id: "8",
        pass,
        detail: format!(
            "quadrature {quad:.1e} (<= 1e-14), Simpson {simpson:.1e} (<= 1e-13), ridge {ridge:.1e} (<= 1e-10), GCV {gcv:.1e} (<= 1e-10); {secs:.1} s (< 10 s)"
        ),
    }
}

fn determinism() -> Outcome {
    let mut runs = Vec::new();
    let dirs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for dir in &dirs {
        let cfg = ExperimentConfig { output_dir: dir.path().to_path_buf(), ..Default::default() };
        let report = run_benchmark(&cfg).expect("benchmark").report;
        let mut csv = Vec::new();
        write_csv(&mut csv, &[report]).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let stripped: Vec<String> =
            text.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string()).collect();
        let mut cache: Vec<_> = fs::read_dir(cfg.cache_dir()).unwrap().map(|e| e.unwrap().path()).collect();
        cache.sort();
        let bytes: Vec<(String, Vec<u8>)> = cache
            .iter()
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(p).unwrap()))
            .collect();
        runs.push((stripped, bytes));
    }
    let csv_same = runs[0].0 == runs[1].0;
    let cache_same = runs[0].1 == runs[1].1 && !runs[0].1.is_empty();
    let size = runs[0].1.first().map_or(0, |(_, b)| b.len());
    Outcome {
        id: "9",
        pass: csv_same && cache_same,
        detail: format!("CSV without timing identical: {csv_same}; reference cache ({size} bytes) identical: {cache_same}"),
    }
}

fn basis_correctness(models: &[&SpectralModel]) -> Outcome {
    let h = 1e-4;
    let d2 = |f: &dyn Fn(f64) -> f64| (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h);
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut worst_ratio, mut worst_boundary) = (0.0f64, 0.0f64);
    for model in models {
        let u = |x: f64, y: f64, t: f64| model.predict(x, y, t).unwrap();
        let peak = (0..=10)
            .map(|k| model.predict_grid(40, 40, k as f64 / 10.0).unwrap().values.iter().fold(0.0f64, |a, v| a.max(v.abs())))
            .fold(0.0, f64::max);
        let c2 = model.basis.c * model.basis.c;
        for _ in 0..100 {
            let (x, y, t) = (rng.random_range(0.01..0.99), rng.random_range(0.01..0.99), rng.random_range(0.01..0.99));
            let r = d2(&|s| u(x, y, t + s)) - c2 * (d2(&|s| u(x + s, y, t)) + d2(&|s| u(x, y + s, t)));
            worst_ratio = worst_ratio.max(r.abs() / (1e-5 * (1.0 + peak)));
        }
        for _ in 0..100 {
            let (s, t) = (rng.random::<f64>(), rng.random_range(0.0..1.0));
            let (x, y) = match rng.random_range(0..4) {
                0 => (s, 0.0),
                1 => (s, 1.0),
                2 => (0.0, s),
                _ => (1.0, s),
            };
            worst_boundary = worst_boundary.max(u(x, y, t).abs());
        }
    }
    Outcome {
        id: "10",
        pass: worst_ratio <= 1.0 && worst_boundary <= 1e-13,
        detail: format!(
            "fourth-order central FD residual at step 1e-4 reaches {:.2e} of the 1e-5 (1 + max|u|) bound; boundary max {worst_boundary:.1e} (<= 1e-13)",
            worst_ratio
        ),
    }
}

fn main() {
    let start = Instant::now();
    let mut outcomes = Vec::new();
    let report = |o: &Outcome| println!("[{}] criterion {:>2}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.detail);

    let poly = full_scale_run(InitialCondition::Polynomial);
    let moll = full_scale_run(InitialCondition::mollifier());
    for o in [
        table_one("1", &poly.report, 0.005, (0.25, 0.40), 50.0),
        table_one("2", &moll.report, 0.03, (0.60, 0.90), 20.0),
        table_two(&poly.report, &moll.report),
        dof_matching(&poly.report),
        lambda_recovery(&[(&poly, 1.0e-6), (&moll, 1.3e-3)]),
        analytic_oracle(),
        energy_conservation(),
        kernel_oracles(),
        determinism(),
        basis_correctness(&[&poly.model, &moll.model]),
    ] {
        report(&o);
        outcomes.push(o);
    }

    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("{} of {} criteria passed in {:.0} s", outcomes.len() - failed, outcomes.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
