//! Experiment configuration, read from a single JSON document.
//!
//! Every field has a default, so `{}` is a valid config. Unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::fem::{CnVariant, StartRule, TimeSampling};
use crate::lhs::LhsMode;
use crate::metrics::SimpsonRule;
use crate::problem::{InitialCondition, WaveProblem};
use crate::spectral::{FitSettings, LambdaChoice, LambdaGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub problem: WaveProblem,
    /// Spectral modes per direction.
    #[serde(rename = "N")]
    pub n_modes: usize,
    /// Latin hypercube sample count.
    pub m: usize,
    pub seed: u64,
    pub lhs_mode: LhsMode,
    pub lambda_grid: LambdaGrid,
    /// Fixed regularization; when set, the GCV search is skipped.
    pub lambda: Option<f64>,
    pub noise_std: f64,
    pub ref_nx: usize,
    pub ref_ny: usize,
    /// Requested reference step; defaults to `1 / (2 ref_nx)`.
    pub dt_ref: Option<f64>,
    #[serde(rename = "Nt_eval")]
    pub nt_eval: usize,
    pub simpson: SimpsonRule,
    /// Update used by the matched coarse solver.
    pub cn_variant: CnVariant,
    /// Update used to build the reference.
    pub reference_variant: CnVariant,
    /// Second-level rule for both the coarse and the reference solve.
    pub start_rule: StartRule,
    /// How the matched coarse trajectory is read between its time levels.
    pub cn_time_sampling: TimeSampling,
    pub snapshot_times: Vec<f64>,
    /// Cells per direction of the surrogate snapshot grid.
    pub snapshot_grid: usize,
    pub output_dir: PathBuf,
    /// Reference cache location; defaults to `<output_dir>/cache`.
    pub cache_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: WaveProblem::unit_square(InitialCondition::Polynomial),
            n_modes: 40,
            m: 5000,
            seed: 2025,
            lhs_mode: LhsMode::Jittered,
            lambda_grid: LambdaGrid::default(),
            lambda: None,
            noise_std: 0.0,
            ref_nx: 200,
            ref_ny: 200,
            dt_ref: None,
            nt_eval: 200,
            simpson: SimpsonRule::Standard,
            cn_variant: CnVariant::Lagged,
            reference_variant: CnVariant::Centered,
            start_rule: StartRule::Taylor,
            cn_time_sampling: TimeSampling::Hold,
            snapshot_times: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            snapshot_grid: 50,
            output_dir: PathBuf::from("out"),
            cache_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Switches to the 400 x 400 reference.
    pub fn paper_scale(mut self) -> Self {
        self.ref_nx = 400;
        self.ref_ny = 400;
        self.dt_ref = None;
        self
    }

    pub fn with_ic(mut self, ic: InitialCondition) -> Self {
        self.problem.ic = ic;
        self
    }

    /// Number of reference steps: the requested step is rounded down so that
    /// it divides `T` exactly.
    pub fn nt_ref(&self) -> usize {
        let requested = self.dt_ref.unwrap_or(1.0 / (2 * self.ref_nx.max(1)) as f64);
        (self.problem.t_final / requested - 1e-9).ceil().max(1.0) as usize
    }

    pub fn dt_ref_effective(&self) -> f64 {
        self.problem.t_final / self.nt_ref() as f64
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(|| self.output_dir.join("cache"))
    }

    pub fn fit_settings(&self) -> Result<FitSettings> {
        let lambda = match self.lambda {
            Some(l) => LambdaChoice::Fixed(l),
            None => LambdaChoice::Gcv(self.lambda_grid.values()?),
        };
        Ok(FitSettings {
            n_modes: self.n_modes,
            samples: self.m,
            seed: self.seed,
            mode: self.lhs_mode,
            lambda,
            noise_std: self.noise_std,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        ensure(self.n_modes >= 1, || "N must be at least 1".into())?;
        ensure(self.m >= 1, || "m must be at least 1".into())?;
        self.lambda_grid.values()?;
        if let Some(l) = self.lambda {
            ensure(l.is_finite() && l >= 0.0, || format!("lambda must be non-negative, got {l}"))?;
        }
        ensure(self.noise_std.is_finite() && self.noise_std >= 0.0, || {
            format!("noise_std must be non-negative, got {}", self.noise_std)
        })?;
        ensure(self.ref_nx >= 2 && self.ref_ny >= 2, || {
            format!("reference grid {}x{} has no interior", self.ref_nx, self.ref_ny)
        })?;
        ensure(u32::try_from(self.ref_nx).is_ok() && u32::try_from(self.ref_ny).is_ok(), || {
            "reference grid too large".into()
        })?;
        if let Some(dt) = self.dt_ref {
            ensure(dt.is_finite() && dt > 0.0, || format!("dt_ref must be positive, got {dt}"))?;
        }
        let spacing = (self.problem.l1 / self.ref_nx as f64).min(self.problem.l2 / self.ref_ny as f64);
        let dt = self.dt_ref.unwrap_or_else(|| self.dt_ref_effective());
        ensure(dt < spacing, || format!("dt_ref = {dt} must be smaller than the reference spacing {spacing}"))?;
        ensure(self.nt_eval >= 2 && self.nt_eval % 2 == 0, || {
            format!("Nt_eval must be even and at least 2, got {}", self.nt_eval)
        })?;
        for &t in &self.snapshot_times {
            ensure(t.is_finite() && (0.0..=self.problem.t_final).contains(&t), || {
                format!("snapshot time {t} outside [0, {}]", self.problem.t_final)
            })?;
        }
        ensure(self.snapshot_grid >= 1, || "snapshot_grid must be at least 1".into())?;
        Ok(())
    }
}

impl std::str::FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_json(s)
    }
}
