//! The DoF-matched comparison pipeline: fit, match, solve, evaluate.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::dof::{match_cn_to_dof, MatchResult};
use crate::error::{Error, Result};
use crate::fem::{cn_solve, FemSystem, FemTrajectory};
use crate::mesh::Mesh;
use crate::metrics::{evaluate_errors, ErrorReport, ReferenceSolution, SpaceTimeField};
use crate::reference::generate_reference;
use crate::spectral::{fit_initial_condition, SpectralModel};

pub const CSV_HEADER: [&str; 9] =
    ["ic", "solver", "st_l2", "st_rel", "linf_l2", "linf_rel", "improvement", "edof_or_dof", "runtime_s"];

pub const CN_LABEL: &str = "cn-fem";
pub const EP_LABEL: &str = "b-epgp";

/// `baseline / candidate`, with `0 / 0` read as no change.
pub fn improvement(baseline: f64, candidate: f64) -> f64 {
    if baseline == candidate {
        1.0
    } else {
        baseline / candidate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub st_l2: f64,
    pub linf_l2: f64,
}

impl Improvement {
    pub fn between(baseline: &ErrorReport, candidate: &ErrorReport) -> Self {
        Improvement {
            st_l2: improvement(baseline.st_l2, candidate.st_l2),
            linf_l2: improvement(baseline.linf_l2, candidate.linf_l2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub ic: String,
    pub seed: u64,
    pub lambda: f64,
    pub edof: f64,
    pub gcv_score: f64,
    pub matched: MatchResult,
    pub cn: ErrorReport,
    pub ep: ErrorReport,
    pub improvement: Improvement,
    /// Fit including the GCV search.
    pub fit_s: f64,
    /// Assembly, factorization and stepping of the matched solver.
    pub cn_solve_s: f64,
    pub evaluate_s: f64,
}

/// Both solvers scored against the same reference on the same mesh.
pub fn evaluate_pair(
    cn: &dyn SpaceTimeField,
    ep: &dyn SpaceTimeField,
    reference: &ReferenceSolution,
    mesh: &Mesh,
    cfg: &ExperimentConfig,
) -> Result<(ErrorReport, ErrorReport, Improvement)> {
    let cn_report = evaluate_errors(cn, reference, mesh, cfg.nt_eval, cfg.simpson)?;
    let ep_report = evaluate_errors(ep, reference, mesh, cfg.nt_eval, cfg.simpson)?;
    let imp = Improvement::between(&cn_report, &ep_report);
    Ok((cn_report, ep_report, imp))
}

/// Artifacts of one pipeline run, kept for snapshot export.
#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub report: BenchmarkReport,
    pub model: SpectralModel,
    pub trajectory: FemTrajectory,
}

pub fn fit_stage(cfg: &ExperimentConfig) -> Result<(SpectralModel, f64)> {
    let start = Instant::now();
    let (model, _) = fit_initial_condition(&cfg.problem, &cfg.fit_settings()?).map_err(|e| e.in_stage("fit"))?;
    Ok((model, start.elapsed().as_secs_f64()))
}

/// Matched coarse solve for a given surrogate DoF.
pub fn solve_stage(cfg: &ExperimentConfig, dof_ep: f64) -> Result<(MatchResult, FemTrajectory, f64)> {
    let matched = match_cn_to_dof(dof_ep, cfg.problem.t_final).map_err(|e| e.in_stage("match"))?;
    let start = Instant::now();
    let trajectory = (|| {
        let mesh = Arc::new(Mesh::structured(cfg.problem.l1, cfg.problem.l2, matched.n, matched.n)?);
        let sys = FemSystem::assemble(Arc::clone(&mesh), cfg.problem.c)?;
        let u0 = mesh.sample_interior(|x, y| cfg.problem.u0(x, y));
        cn_solve(&sys, &u0, matched.dt, matched.nt, cfg.cn_variant, cfg.start_rule)
    })()
    .map_err(|e| e.in_stage("solve"))?;
    Ok((matched, trajectory, start.elapsed().as_secs_f64()))
}

/// Runs the pipeline against an already available reference.
pub fn run_with_reference(cfg: &ExperimentConfig, reference: &ReferenceSolution) -> Result<BenchmarkRun> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    let (model, fit_s) = fit_stage(cfg)?;
    info!("fit: lambda = {:e}, edof = {:.3}, {fit_s:.3} s", model.lambda, model.edof);
    let (matched, trajectory, cn_solve_s) = solve_stage(cfg, model.edof)?;
    info!("matched n = {}, dt = {}, DoF = {}, {cn_solve_s:.3} s", matched.n, matched.dt, matched.dof_cn);

    let start = Instant::now();
    let (cn, ep, imp) = evaluate_pair(
        &trajectory.field(cfg.cn_time_sampling),
        &model,
        reference,
        &trajectory.mesh,
        cfg,
    )
    .map_err(|e| e.in_stage("evaluate"))?;
    let evaluate_s = start.elapsed().as_secs_f64();

    let report = BenchmarkReport {
        ic: cfg.problem.ic.label().to_string(),
        seed: cfg.seed,
        lambda: model.lambda,
        edof: model.edof,
        gcv_score: model.diagnostics.gcv_score,
        matched,
        cn,
        ep,
        improvement: imp,
        fit_s,
        cn_solve_s,
        evaluate_s,
    };
    Ok(BenchmarkRun { report, model, trajectory })
}

/// Full pipeline including the (cached) reference.
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<BenchmarkRun> {
    let (reference, status, _) = generate_reference(cfg).map_err(|e| e.in_stage("reference"))?;
    info!("reference: {status:?}");
    run_with_reference(cfg, &reference)
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Two rows per report, `cn-fem` then `b-epgp`. The `improvement` column is
/// the space-time ratio, 1 on the baseline row.
pub fn write_csv<W: Write>(writer: W, reports: &[BenchmarkReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in reports {
        let rows = [
            (CN_LABEL, &r.cn, 1.0, r.matched.dof_cn as f64, r.cn_solve_s),
            (EP_LABEL, &r.ep, r.improvement.st_l2, r.edof, r.fit_s),
        ];
        for (solver, e, imp, dof, secs) in rows {
            w.write_record([
                r.ic.clone(),
                solver.to_string(),
                num(e.st_l2),
                num(e.st_rel),
                num(e.linf_l2),
                num(e.linf_rel),
                num(imp),
                num(dof),
                format!("{secs:.6}"),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `report.csv` and `report.json` into `dir`.
pub fn write_outputs(dir: &Path, reports: &[BenchmarkReport]) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join("report.csv");
    let json_path = dir.join("report.json");
    let mut buf = Vec::new();
    write_csv(&mut buf, reports)?;
    std::fs::write(&csv_path, buf)?;
    std::fs::write(&json_path, serde_json::to_string_pretty(reports)?)?;
    Ok((csv_path, json_path))
}
