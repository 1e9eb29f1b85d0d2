//! Fine-grid reference solutions and their on-disk cache.

use std::hash::Hasher;
use std::path::{Path, PathBuf};

use fnv::FnvHasher;
use log::{info, warn};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{ensure, Error, Result};
use crate::fem::{cn_solve_streaming, CnVariant, FemSystem, StartRule};
use crate::gridfile::{read_grid_file, write_grid_file, GridHeader, FORMAT_VERSION};
use crate::metrics::ReferenceSolution;
use crate::problem::WaveProblem;

/// Everything that determines a reference solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceSpec {
    pub problem: WaveProblem,
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub variant: CnVariant,
    pub start: StartRule,
}

impl ReferenceSpec {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        ReferenceSpec {
            problem: cfg.problem.clone(),
            nx: cfg.ref_nx,
            ny: cfg.ref_ny,
            nt: cfg.nt_ref(),
            variant: cfg.reference_variant,
            start: cfg.start_rule,
        }
    }

    pub fn dt(&self) -> f64 {
        self.problem.t_final / self.nt as f64
    }

    /// FNV-1a hash of the canonical JSON form, salted with the file format version.
    pub fn fingerprint(&self) -> Result<u64> {
        let mut h = FnvHasher::default();
        h.write(&FORMAT_VERSION.to_le_bytes());
        h.write(serde_json::to_string(self)?.as_bytes());
        Ok(h.finish())
    }

    pub fn cache_path(&self, dir: &Path) -> Result<PathBuf> {
        Ok(dir.join(format!(
            "reference-{}-{}x{}-{}-{:016x}.wben",
            self.problem.ic.label(),
            self.nx,
            self.ny,
            self.nt,
            self.fingerprint()?
        )))
    }

    fn header(&self) -> GridHeader {
        GridHeader {
            nx: self.nx as u32,
            ny: self.ny as u32,
            nt: self.nt as u32,
            l1: self.problem.l1,
            l2: self.problem.l2,
            c: self.problem.c,
            t_final: self.problem.t_final,
            dt: self.dt(),
        }
    }
}

/// Runs the fine solve, writing every level straight into the output array.
/// Boundary nodes are never written and stay exactly zero.
pub fn compute_reference(spec: &ReferenceSpec) -> Result<ReferenceSolution> {
    spec.problem.validate()?;
    ensure(spec.nt >= 1, || "reference needs at least one time step".into())?;
    let sys = FemSystem::for_problem(&spec.problem, spec.nx, spec.ny)?;
    let mesh = &sys.mesh;
    let level_len = (spec.nx + 1) * (spec.ny + 1);
    let total = level_len
        .checked_mul(spec.nt + 1)
        .ok_or_else(|| Error::InvalidArgument("reference array size overflows".into()))?;
    let mut values = vec![0.0; total];
    let u0 = mesh.sample_interior(|x, y| spec.problem.u0(x, y));
    cn_solve_streaming(&sys, &u0, spec.dt(), spec.nt, spec.variant, spec.start, |level, u| {
        let out = &mut values[level * level_len..(level + 1) * level_len];
        for (&g, &v) in mesh.interior_nodes.iter().zip(u) {
            out[g] = v;
        }
        Ok(())
    })?;
    Ok(ReferenceSolution {
        grid_nx: spec.nx,
        grid_ny: spec.ny,
        dt_ref: spec.dt(),
        nt_ref: spec.nt,
        values,
        problem: spec.problem.clone(),
    })
}

pub fn save_reference(path: &Path, spec: &ReferenceSpec, reference: &ReferenceSolution) -> Result<u64> {
    write_grid_file(path, &spec.header(), &reference.values)
}

/// Loads a cached reference, checking that its header matches `spec` exactly.
pub fn load_reference(path: &Path, spec: &ReferenceSpec) -> Result<ReferenceSolution> {
    let (header, values) = read_grid_file(path)?;
    let expected = spec.header();
    if header != expected {
        return Err(Error::Cache {
            path: path.to_path_buf(),
            reason: format!("header {header:?} does not match {expected:?}"),
        });
    }
    Ok(ReferenceSolution {
        grid_nx: spec.nx,
        grid_ny: spec.ny,
        dt_ref: spec.dt(),
        nt_ref: spec.nt,
        values,
        problem: spec.problem.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CacheStatus {
    Disabled,
    Hit,
    Created,
    /// An unreadable or mismatched file was replaced.
    Regenerated { reason: String },
}

/// Loads `spec` from `cache_dir` or computes and stores it.
pub fn load_or_compute(spec: &ReferenceSpec, cache_dir: Option<&Path>) -> Result<(ReferenceSolution, CacheStatus, Option<PathBuf>)> {
    let Some(dir) = cache_dir else {
        return Ok((compute_reference(spec)?, CacheStatus::Disabled, None));
    };
    let path = spec.cache_path(dir)?;
    let mut status = CacheStatus::Created;
    if path.exists() {
        match load_reference(&path, spec) {
            Ok(r) => {
                info!("reference loaded from {}", path.display());
                return Ok((r, CacheStatus::Hit, Some(path)));
            }
            Err(e @ (Error::Cache { .. } | Error::Format(_))) => {
                warn!("discarding cache entry: {e}");
                status = CacheStatus::Regenerated { reason: e.to_string() };
            }
            Err(e) => return Err(e),
        }
    }
    let reference = compute_reference(spec)?;
    save_reference(&path, spec, &reference)?;
    info!("reference written to {}", path.display());
    Ok((reference, status, Some(path)))
}

/// Reference for `cfg`, using the configured cache directory.
pub fn generate_reference(cfg: &ExperimentConfig) -> Result<(ReferenceSolution, CacheStatus, Option<PathBuf>)> {
    cfg.validate()?;
    load_or_compute(&ReferenceSpec::from_config(cfg), Some(&cfg.cache_dir()))
}
