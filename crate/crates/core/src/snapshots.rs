//! Gridded snapshots of all three solutions for contour plots.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::fem::FemTrajectory;
use crate::grid::Grid2;
use crate::gridfile::{write_grid_file, GridHeader};
use crate::metrics::ReferenceSolution;
use crate::spectral::SpectralModel;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub method: &'static str,
    pub t: f64,
    pub grid: Grid2,
}

/// Coarse trajectory read at every node of a `nx x ny` grid.
pub fn trajectory_on_grid(traj: &FemTrajectory, cfg: &ExperimentConfig, nx: usize, ny: usize, t: f64) -> Result<Grid2> {
    let mut g = Grid2::from_fn(nx, ny, cfg.problem.l1, cfg.problem.l2, |_, _| 0.0)?;
    for j in 1..ny {
        for i in 1..nx {
            g.values[j * (nx + 1) + i] = traj.eval_sampled(g.x(i), g.y(j), t, cfg.cn_time_sampling)?;
        }
    }
    Ok(g)
}

/// Reference on its own grid, the coarse solution on the reference grid and
/// the surrogate on a `snapshot_grid` square grid, at each configured time.
pub fn collect_snapshots(
    cfg: &ExperimentConfig,
    model: &SpectralModel,
    traj: &FemTrajectory,
    reference: &ReferenceSolution,
) -> Result<Vec<Snapshot>> {
    let mut out = Vec::with_capacity(3 * cfg.snapshot_times.len());
    for &t in &cfg.snapshot_times {
        out.push(Snapshot { method: "reference", t, grid: reference.time_interp(t)? });
        let cn = trajectory_on_grid(traj, cfg, reference.grid_nx, reference.grid_ny, t)?;
        out.push(Snapshot { method: "cn-fem", t, grid: cn });
        let n = cfg.snapshot_grid;
        out.push(Snapshot { method: "b-epgp", t, grid: model.predict_grid(n, n, t)? });
    }
    Ok(out)
}

pub fn write_grid_csv<W: Write>(writer: W, grid: &Grid2) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(["x", "y", "value"]).map_err(io)?;
    for j in 0..=grid.ny {
        for i in 0..=grid.nx {
            w.write_record([format!("{:e}", grid.x(i)), format!("{:e}", grid.y(j)), format!("{:e}", grid.at(i, j))])
                .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes each snapshot as `<ic>-<method>-t<time>.csv` and `.wben` in `dir`.
pub fn write_snapshots(dir: &Path, ic: &str, c: f64, snapshots: &[Snapshot]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for s in snapshots {
        let stem = format!("{ic}-{}-t{:.3}", s.method, s.t);
        let csv_path = dir.join(format!("{stem}.csv"));
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &s.grid)?;
        std::fs::write(&csv_path, buf)?;
        let header = GridHeader {
            nx: u32::try_from(s.grid.nx).map_err(|_| Error::invalid("grid too large"))?,
            ny: u32::try_from(s.grid.ny).map_err(|_| Error::invalid("grid too large"))?,
            nt: 0,
            l1: s.grid.l1,
            l2: s.grid.l2,
            c,
            t_final: s.t,
            dt: 0.0,
        };
        let bin_path = dir.join(format!("{stem}.wben"));
        write_grid_file(&bin_path, &header, &s.grid.values)?;
        written.push(csv_path);
        written.push(bin_path);
    }
    Ok(written)
}

/// Collects and writes all snapshots into `<output_dir>/snapshots`.
pub fn emit_snapshots(
    cfg: &ExperimentConfig,
    model: &SpectralModel,
    traj: &FemTrajectory,
    reference: &ReferenceSolution,
) -> Result<Vec<PathBuf>> {
    let snaps = collect_snapshots(cfg, model, traj, reference)?;
    write_snapshots(&cfg.output_dir.join("snapshots"), cfg.problem.ic.label(), cfg.problem.c, &snaps)
}
