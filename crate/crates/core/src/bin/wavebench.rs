use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use log::error;

use wavebench::benchmark::{fit_stage, run_benchmark, run_with_reference, write_outputs, BenchmarkReport};
use wavebench::config::ExperimentConfig;
use wavebench::dof::match_cn_to_dof;
use wavebench::fem::{cn_solve, FemSystem};
use wavebench::gridfile::{write_grid_file, GridHeader};
use wavebench::mesh::Mesh;
use wavebench::metrics::SimpsonRule;
use wavebench::problem::InitialCondition;
use wavebench::reference::generate_reference;
use wavebench::snapshots::emit_snapshots;
use wavebench::Result;

#[derive(Parser)]
#[command(name = "wavebench", version, about = "DoF-matched wave equation benchmark")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// polynomial | mollifier | single-mode
    #[arg(long, global = true)]
    ic: Option<InitialCondition>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// 400 x 400 reference grid.
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Halve the first Simpson weight.
    #[arg(long, global = true)]
    paper_simpson: bool,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build or load the cached reference solution.
    Reference,
    /// Fit the surrogate and write its JSON model.
    Fit,
    /// Run the coarse finite element solver only.
    Solve {
        /// Intervals per direction.
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// Time steps; defaults to `n`.
        #[arg(long)]
        nt: Option<usize>,
    },
    /// Print the matched resolution for a surrogate DoF.
    Match {
        #[arg(long)]
        dof: f64,
    },
    /// Full pipeline; without --ic runs both polynomial and mollifier.
    Benchmark,
    /// Export gridded snapshots for contour plots.
    Snapshots,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if self.paper_scale {
            cfg = cfg.paper_scale();
        }
        if let Some(ic) = &self.ic {
            cfg.problem.ic = ic.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if self.paper_simpson {
            cfg.simpson = SimpsonRule::HalvedFirst;
        }
        if let Some(out) = &self.output {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_table(reports: &[BenchmarkReport]) {
    println!("{:<12} {:>12} {:>12} {:>9} {:>9} {:>10} {:>10} {:>9}", "ic", "CN st_l2", "EP st_l2", "CN rel", "EP rel", "improve", "EP edof", "CN DoF");
    for r in reports {
        println!(
            "{:<12} {:>12.3e} {:>12.3e} {:>8.2}% {:>8.2}% {:>9.2}x {:>10.1} {:>9}",
            r.ic,
            r.cn.st_l2,
            r.ep.st_l2,
            100.0 * r.cn.st_rel,
            100.0 * r.ep.st_rel,
            r.improvement.st_l2,
            r.edof,
            r.matched.dof_cn
        );
    }
    println!();
    println!("{:<12} {:>12} {:>12} {:>9} {:>9} {:>10}", "ic", "CN linf", "EP linf", "CN rel", "EP rel", "improve");
    for r in reports {
        println!(
            "{:<12} {:>12.3e} {:>12.3e} {:>8.2}% {:>8.2}% {:>9.2}x",
            r.ic,
            r.cn.linf_l2,
            r.ep.linf_l2,
            100.0 * r.cn.linf_rel,
            100.0 * r.ep.linf_rel,
            r.improvement.linf_l2
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.common.config()?;
    match cli.command {
        Command::Reference => {
            let (r, status, path) = generate_reference(&cfg)?;
            println!("reference {}x{} with {} steps: {status:?}", r.grid_nx, r.grid_ny, r.nt_ref);
            if let Some(p) = path {
                println!("{}", p.display());
            }
        }
        Command::Fit => {
            let (model, secs) = fit_stage(&cfg)?;
            std::fs::create_dir_all(&cfg.output_dir)?;
            let path = cfg.output_dir.join(format!("model-{}.json", cfg.problem.ic.label()));
            model.save_json(&path)?;
            println!("lambda = {:e}, edof = {:.4}, gcv = {:e}, {secs:.3} s", model.lambda, model.edof, model.diagnostics.gcv_score);
            println!("{}", path.display());
        }
        Command::Solve { n, nt } => {
            let nt = nt.unwrap_or(n);
            let p = &cfg.problem;
            let mesh = Arc::new(Mesh::structured(p.l1, p.l2, n, n)?);
            let sys = FemSystem::assemble(Arc::clone(&mesh), p.c)?;
            let u0 = mesh.sample_interior(|x, y| p.u0(x, y));
            let traj = cn_solve(&sys, &u0, p.t_final / nt as f64, nt, cfg.cn_variant, cfg.start_rule)?;
            let values: Vec<f64> = (0..=nt).flat_map(|k| traj.nodal(k)).collect();
            let header = GridHeader { nx: n as u32, ny: n as u32, nt: nt as u32, l1: p.l1, l2: p.l2, c: p.c, t_final: p.t_final, dt: traj.dt };
            let path = cfg.output_dir.join(format!("solve-{}-n{n}-nt{nt}.wben", p.ic.label()));
            write_grid_file(&path, &header, &values)?;
            println!("{} unknowns, {} levels, {:?}", sys.unknowns(), nt + 1, traj.stats);
            println!("{}", path.display());
        }
        Command::Match { dof } => {
            let m = match_cn_to_dof(dof, cfg.problem.t_final)?;
            println!("{}", serde_json::to_string_pretty(&m)?);
        }
        Command::Benchmark => {
            let ics = match &cli.common.ic {
                Some(ic) => vec![ic.clone()],
                None if cli.common.config.is_some() => vec![cfg.problem.ic.clone()],
                None => vec![InitialCondition::Polynomial, InitialCondition::mollifier()],
            };
            let mut reports = Vec::new();
            for ic in ics {
                let run = run_benchmark(&cfg.clone().with_ic(ic))?;
                reports.push(run.report);
            }
            print_table(&reports);
            let (csv, json) = write_outputs(&cfg.output_dir, &reports)?;
            println!("\n{}\n{}", csv.display(), json.display());
        }
        Command::Snapshots => {
            let (reference, _, _) = generate_reference(&cfg)?;
            let run = run_with_reference(&cfg, &reference)?;
            let files = emit_snapshots(&cfg, &run.model, &run.trajectory, &reference)?;
            println!("{} files written to {}", files.len(), cfg.output_dir.join("snapshots").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                error!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
