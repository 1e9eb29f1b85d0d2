//! Boundary-constrained sine-basis surrogate for the wave equation on a rectangle.
//!
//! Each basis function `sin(j pi x / l1) sin(k pi y / l2) cos(omega_jk t)` with
//! `omega_jk = c pi sqrt((j/l1)^2 + (k/l2)^2)` solves the wave equation, vanishes
//! on the boundary, and has zero initial velocity. Only the weights are fitted:
//! ridge regression on samples of the initial displacement, solved through a
//! thin SVD of the design matrix that is reused for every trial `lambda`.
//!
//! Columns (and weights) are ordered lexicographically in `(j, k)` with `j`
//! outer: column `(j - 1) * n + (k - 1)`.

use std::f64::consts::PI;
use std::path::Path;

use faer::{ColRef, Mat};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::grid::{in_closed_interval, Grid2};
use crate::lhs::{lhs_sample, LhsMode};
use crate::metrics::{QuadPoint, SpaceTimeField};
use crate::problem::WaveProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    pub n_modes: usize,
    pub l1: f64,
    pub l2: f64,
    pub c: f64,
    /// `omega_jk` in column order.
    pub omegas: Vec<f64>,
}

impl SpectralBasis {
    pub fn new(n_modes: usize, l1: f64, l2: f64, c: f64) -> Result<Self> {
        ensure(n_modes >= 1, || "at least one mode per direction is required".into())?;
        ensure(l1 > 0.0 && l2 > 0.0 && c > 0.0, || format!("invalid basis parameters l1={l1} l2={l2} c={c}"))?;
        let mut omegas = Vec::with_capacity(n_modes * n_modes);
        for j in 1..=n_modes {
            for k in 1..=n_modes {
                let (a, b) = (j as f64 / l1, k as f64 / l2);
                omegas.push(c * PI * (a * a + b * b).sqrt());
            }
        }
        Ok(SpectralBasis { n_modes, l1, l2, c, omegas })
    }

    pub fn for_problem(n_modes: usize, problem: &WaveProblem) -> Result<Self> {
        SpectralBasis::new(n_modes, problem.l1, problem.l2, problem.c)
    }

    pub fn len(&self) -> usize {
        self.n_modes * self.n_modes
    }

    pub fn is_empty(&self) -> bool {
        self.n_modes == 0
    }

    pub fn column(&self, j: usize, k: usize) -> usize {
        (j - 1) * self.n_modes + (k - 1)
    }

    pub fn omega(&self, j: usize, k: usize) -> f64 {
        self.omegas[self.column(j, k)]
    }

    /// `sin(j pi x / l1)` for `j = 1..=n`.
    fn x_sines(&self, x: f64, out: &mut [f64]) {
        sine_table(PI * x / self.l1, out);
    }

    fn y_sines(&self, y: f64, out: &mut [f64]) {
        sine_table(PI * y / self.l2, out);
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        in_closed_interval(x, self.l1) && in_closed_interval(y, self.l2)
    }
}

fn sine_table(theta: f64, out: &mut [f64]) {
    for (j, s) in out.iter_mut().enumerate() {
        *s = ((j + 1) as f64 * theta).sin();
    }
}

/// Spatial basis sampled at the regression points.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub values: Mat<f64>,
    pub points: Vec<[f64; 2]>,
}

impl DesignMatrix {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }
}

pub fn build_design_matrix(points: &[[f64; 2]], basis: &SpectralBasis) -> Result<DesignMatrix> {
    if let Some(p) = points.iter().find(|p| !basis.contains(p[0], p[1])) {
        return Err(Error::invalid(format!("sample point ({}, {}) lies outside the domain", p[0], p[1])));
    }
    let n = basis.n_modes;
    let mut values = Mat::<f64>::zeros(points.len(), n * n);
    let mut sx = vec![0.0; n];
    let mut sy = vec![0.0; n];
    for (i, &[x, y]) in points.iter().enumerate() {
        basis.x_sines(x, &mut sx);
        basis.y_sines(y, &mut sy);
        for (j, a) in sx.iter().enumerate() {
            for (k, b) in sy.iter().enumerate() {
                values[(i, j * n + k)] = a * b;
            }
        }
    }
    Ok(DesignMatrix { values, points: points.to_vec() })
}

/// Thin SVD of a design matrix together with the spectral coordinates of one
/// observation vector. Every `lambda`-dependent quantity is a cheap filter
/// over the retained singular values.
#[derive(Debug, Clone)]
pub struct RidgeFit {
    v: Mat<f64>,
    sigma: Vec<f64>,
    /// `U^T y`
    beta: Vec<f64>,
    /// `|| y - U U^T y ||^2`, the part of the data no weights can reach.
    orth_residual_sq: f64,
    rows: usize,
    cols: usize,
    rank: usize,
}

impl RidgeFit {
    pub fn new(phi: &DesignMatrix, observations: &[f64]) -> Result<Self> {
        let (rows, cols) = (phi.rows(), phi.cols());
        ensure(rows >= 1 && cols >= 1, || "design matrix is empty".into())?;
        ensure(observations.len() == rows, || {
            format!("{} observations for a design matrix with {rows} rows", observations.len())
        })?;
        ensure(observations.iter().all(|v| v.is_finite()), || "observations contain non-finite values".into())?;
        let finite = (0..cols).all(|j| phi.values.col(j).iter().all(|v| v.is_finite()));
        ensure(finite, || "design matrix contains non-finite values".into())?;

        let svd = phi
            .values
            .thin_svd()
            .map_err(|e| Error::Numerical(format!("SVD of the {rows}x{cols} design matrix did not converge: {e:?}")))?;
        let u = svd.U().to_owned();
        let v = svd.V().to_owned();
        let sigma: Vec<f64> = svd.S().column_vector().iter().copied().collect();

        let y = ColRef::from_slice(observations);
        let beta_col = u.transpose() * y;
        let beta: Vec<f64> = beta_col.iter().copied().collect();
        let fitted = &u * &beta_col;
        let orth_residual_sq = observations.iter().zip(fitted.iter()).map(|(a, b)| (a - b) * (a - b)).sum();

        let tol = sigma.first().copied().unwrap_or(0.0) * rows.max(cols) as f64 * f64::EPSILON;
        let rank = sigma.iter().filter(|&&s| s > tol).count();
        Ok(RidgeFit { v, sigma, beta, orth_residual_sq, rows, cols, rank })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Spectral filter `sigma / (sigma^2 + lambda)`; at `lambda = 0` it is `1 / sigma`
    /// on the numerical range and zero elsewhere.
    fn filter(&self, i: usize, lambda: f64) -> f64 {
        let s = self.sigma[i];
        if lambda == 0.0 {
            if i < self.rank {
                1.0 / s
            } else {
                0.0
            }
        } else {
            s / (s * s + lambda)
        }
    }

    /// Ridge weights `V diag(sigma / (sigma^2 + lambda)) U^T y`.
    pub fn weights(&self, lambda: f64) -> Result<Vec<f64>> {
        ensure(lambda.is_finite() && lambda >= 0.0, || format!("lambda must be non-negative, got {lambda}"))?;
        if lambda == 0.0 && self.rank < self.cols {
            return Err(Error::Singular(format!(
                "unregularized fit needs full column rank, design matrix has rank {} < {}",
                self.rank, self.cols
            )));
        }
        let scaled: Vec<f64> = (0..self.sigma.len()).map(|i| self.filter(i, lambda) * self.beta[i]).collect();
        let w = &self.v * ColRef::from_slice(&scaled);
        Ok(w.iter().copied().collect())
    }

    /// `|| y - Phi w_lambda ||^2`
    pub fn residual_sq(&self, lambda: f64) -> f64 {
        let inside: f64 = self
            .sigma
            .iter()
            .zip(&self.beta)
            .enumerate()
            .map(|(i, (&s, &b))| {
                let shrink = if lambda == 0.0 {
                    if i < self.rank {
                        0.0
                    } else {
                        1.0
                    }
                } else {
                    lambda / (s * s + lambda)
                };
                shrink * shrink * b * b
            })
            .sum();
        inside + self.orth_residual_sq
    }

    /// Trace of the hat matrix, `sum sigma^2 / (sigma^2 + lambda)`.
    pub fn effective_dof(&self, lambda: f64) -> Result<f64> {
        ensure(lambda.is_finite() && lambda >= 0.0, || format!("lambda must be non-negative, got {lambda}"))?;
        if lambda == 0.0 {
            return Ok(self.rank as f64);
        }
        Ok(self.sigma.iter().map(|&s| s * s / (s * s + lambda)).sum())
    }

    /// Generalized cross-validation score `|| y - Phi w ||^2 / (m - tr H)^2`.
    pub fn gcv_score(&self, lambda: f64) -> Result<f64> {
        ensure(lambda.is_finite() && lambda > 0.0, || format!("GCV needs lambda > 0, got {lambda}"))?;
        // m - tr H = (m - r) + sum lambda / (sigma^2 + lambda), free of cancellation.
        let denom = (self.rows - self.sigma.len()) as f64
            + self.sigma.iter().map(|&s| lambda / (s * s + lambda)).sum::<f64>();
        ensure(denom > 0.0, || format!("hat-matrix trace reaches the sample count at lambda = {lambda}"))?;
        Ok(self.residual_sq(lambda) / (denom * denom))
    }
}

/// Convenience wrapper returning the weights together with the reusable factorization.
pub fn ridge_fit_svd(phi: &DesignMatrix, observations: &[f64], lambda: f64) -> Result<(Vec<f64>, RidgeFit)> {
    let fit = RidgeFit::new(phi, observations)?;
    let w = fit.weights(lambda)?;
    Ok((w, fit))
}

pub fn gcv_score(fit: &RidgeFit, lambda: f64) -> Result<f64> {
    fit.gcv_score(lambda)
}

pub fn effective_dof(fit: &RidgeFit, lambda: f64) -> Result<f64> {
    fit.effective_dof(lambda)
}

/// Log-spaced search grid for `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub min: f64,
    pub max: f64,
    pub per_decade: usize,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid { min: 1e-12, max: 1e2, per_decade: 8 }
    }
}

impl LambdaGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        ensure(self.min > 0.0 && self.max >= self.min && self.per_decade >= 1, || {
            format!("invalid lambda grid [{}, {}] with {} points per decade", self.min, self.max, self.per_decade)
        })?;
        let (a, b) = (self.min.log10(), self.max.log10());
        let steps = ((b - a) * self.per_decade as f64).round() as usize;
        if steps == 0 {
            return Ok(vec![self.min]);
        }
        Ok((0..=steps).map(|i| 10f64.powf(a + (b - a) * i as f64 / steps as f64)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSelection {
    pub lambda: f64,
    pub edof: f64,
    pub score: f64,
}

/// Minimizes GCV over `grid` (ties go to the larger `lambda`), then refines
/// once by golden-section search in `log10(lambda)` between the neighbours of
/// the grid minimizer. The refined point is kept only if it scores strictly lower.
pub fn select_lambda_gcv(fit: &RidgeFit, grid: &[f64]) -> Result<LambdaSelection> {
    ensure(!grid.is_empty(), || "lambda grid is empty".into())?;
    ensure(grid.iter().all(|&l| l.is_finite() && l > 0.0), || "lambda grid values must be positive".into())?;
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();

    let scores = sorted.iter().map(|&l| fit.gcv_score(l)).collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s <= scores[best] {
            best = i;
        }
    }
    let (mut lambda, mut score) = (sorted[best], scores[best]);

    if sorted.len() > 1 {
        let lo = sorted[best.saturating_sub(1)].log10();
        let hi = sorted[(best + 1).min(sorted.len() - 1)].log10();
        let objective = |e: f64| fit.gcv_score(10f64.powf(e)).unwrap_or(f64::INFINITY);
        let e = golden_section(objective, lo, hi, 1e-6);
        let (cand, cand_score) = (10f64.powf(e), objective(e));
        if cand_score < score {
            lambda = cand;
            score = cand_score;
        }
    }
    Ok(LambdaSelection { lambda, edof: fit.effective_dof(lambda)?, score })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub residual_norm: f64,
    pub gcv_score: f64,
    pub seed: u64,
    pub samples: usize,
}

/// A fitted surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    pub basis: SpectralBasis,
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub edof: f64,
    pub diagnostics: FitDiagnostics,
}

/// Sampling and regularization settings for [`fit_initial_condition`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub n_modes: usize,
    pub samples: usize,
    pub seed: u64,
    pub mode: LhsMode,
    pub lambda: LambdaChoice,
    /// Standard deviation of additive Gaussian noise on the samples; zero disables it.
    pub noise_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LambdaChoice {
    Fixed(f64),
    Gcv(Vec<f64>),
}

/// Samples `u0` on a Latin hypercube, fits ridge weights and returns the model
/// together with its factorization.
pub fn fit_initial_condition(problem: &WaveProblem, settings: &FitSettings) -> Result<(SpectralModel, RidgeFit)> {
    problem.validate()?;
    let basis = SpectralBasis::for_problem(settings.n_modes, problem)?;
    let points = lhs_sample(settings.samples, problem.l1, problem.l2, settings.seed, settings.mode)?;
    let phi = build_design_matrix(&points, &basis)?;
    let mut observations: Vec<f64> = points.iter().map(|p| problem.u0(p[0], p[1])).collect();
    if settings.noise_std > 0.0 {
        let normal = Normal::new(0.0, settings.noise_std).map_err(|e| Error::invalid(e.to_string()))?;
        // Separate stream from the design so noise never perturbs the sample locations.
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ 0x9e37_79b9_7f4a_7c15);
        for o in &mut observations {
            *o += normal.sample(&mut rng);
        }
    }
    let fit = RidgeFit::new(&phi, &observations)?;
    let (lambda, score) = match &settings.lambda {
        LambdaChoice::Fixed(l) => (*l, if *l > 0.0 { fit.gcv_score(*l)? } else { f64::NAN }),
        LambdaChoice::Gcv(grid) => {
            let sel = select_lambda_gcv(&fit, grid)?;
            (sel.lambda, sel.score)
        }
    };
    let weights = fit.weights(lambda)?;
    let model = SpectralModel {
        edof: fit.effective_dof(lambda)?,
        weights,
        lambda,
        diagnostics: FitDiagnostics {
            residual_norm: fit.residual_sq(lambda).sqrt(),
            gcv_score: score,
            seed: settings.seed,
            samples: settings.samples,
        },
        basis,
    };
    Ok((model, fit))
}

impl SpectralModel {
    /// Model with explicit weights, used for hand-built surrogates.
    pub fn from_weights(basis: SpectralBasis, weights: Vec<f64>) -> Result<Self> {
        ensure(weights.len() == basis.len(), || {
            format!("{} weights for a basis of {} functions", weights.len(), basis.len())
        })?;
        let basis_len = basis.len();
        Ok(SpectralModel {
            basis,
            weights,
            lambda: 0.0,
            edof: basis_len as f64,
            diagnostics: FitDiagnostics { residual_norm: f64::NAN, gcv_score: f64::NAN, seed: 0, samples: 0 },
        })
    }

    fn time_weights(&self, t: f64) -> Vec<f64> {
        self.weights.iter().zip(&self.basis.omegas).map(|(w, om)| w * (om * t).cos()).collect()
    }

    fn eval_with(&self, tw: &[f64], x: f64, y: f64, sx: &mut [f64], sy: &mut [f64]) -> f64 {
        self.basis.x_sines(x, sx);
        self.basis.y_sines(y, sy);
        let n = self.basis.n_modes;
        sx.iter()
            .enumerate()
            .map(|(j, a)| a * tw[j * n..(j + 1) * n].iter().zip(sy.iter()).map(|(w, b)| w * b).sum::<f64>())
            .sum()
    }

    pub fn predict(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        ensure(self.basis.contains(x, y), || format!("point ({x}, {y}) lies outside the domain"))?;
        ensure(t.is_finite(), || format!("time must be finite, got {t}"))?;
        let n = self.basis.n_modes;
        let (mut sx, mut sy) = (vec![0.0; n], vec![0.0; n]);
        Ok(self.eval_with(&self.time_weights(t), x, y, &mut sx, &mut sy))
    }

    /// Evaluates on a uniform `(nx+1) x (ny+1)` grid using separable sine tables.
    pub fn predict_grid(&self, nx: usize, ny: usize, t: f64) -> Result<Grid2> {
        ensure(nx >= 1 && ny >= 1, || "prediction grid needs at least one cell per direction".into())?;
        let n = self.basis.n_modes;
        let tw = self.time_weights(t);
        let probe = Grid2::from_fn(nx, ny, self.basis.l1, self.basis.l2, |_, _| 0.0)?;
        let mut sx = vec![0.0; (nx + 1) * n];
        for i in 0..=nx {
            self.basis.x_sines(probe.x(i), &mut sx[i * n..(i + 1) * n]);
        }
        let mut sy = vec![0.0; n];
        let mut partial = vec![0.0; n];
        let mut values = vec![0.0; (nx + 1) * (ny + 1)];
        for l in 0..=ny {
            self.basis.y_sines(probe.y(l), &mut sy);
            for (j, p) in partial.iter_mut().enumerate() {
                *p = tw[j * n..(j + 1) * n].iter().zip(&sy).map(|(w, b)| w * b).sum();
            }
            for i in 0..=nx {
                values[l * (nx + 1) + i] = sx[i * n..(i + 1) * n].iter().zip(&partial).map(|(a, b)| a * b).sum();
            }
        }
        // Every basis function vanishes on the boundary; drop the rounding residue of sin(j pi).
        let mut grid = Grid2::new(nx, ny, self.basis.l1, self.basis.l2, values)?;
        grid.zero_boundary();
        Ok(grid)
    }

    /// Weight of mode `(j, k)`.
    pub fn weight(&self, j: usize, k: usize) -> f64 {
        self.weights[self.basis.column(j, k)]
    }

    pub fn to_file(&self) -> SpectralModelFile {
        SpectralModelFile {
            n: self.basis.n_modes,
            l1: self.basis.l1,
            l2: self.basis.l2,
            c: self.basis.c,
            lambda: self.lambda,
            edof: self.edof,
            seed: self.diagnostics.seed,
            weights: self.weights.clone(),
        }
    }

    pub fn from_file(file: &SpectralModelFile) -> Result<Self> {
        let basis = SpectralBasis::new(file.n, file.l1, file.l2, file.c)?;
        let mut model = SpectralModel::from_weights(basis, file.weights.clone())?;
        model.lambda = file.lambda;
        model.edof = file.edof;
        model.diagnostics.seed = file.seed;
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        SpectralModel::from_file(&serde_json::from_str(text)?)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// On-disk form of a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralModelFile {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    pub c: f64,
    pub lambda: f64,
    pub edof: f64,
    pub seed: u64,
    pub weights: Vec<f64>,
}

impl SpaceTimeField for SpectralModel {
    fn eval_points(&self, points: &[QuadPoint], t: f64, out: &mut [f64]) -> Result<()> {
        let n = self.basis.n_modes;
        let tw = self.time_weights(t);
        let (mut sx, mut sy) = (vec![0.0; n], vec![0.0; n]);
        for (o, q) in out.iter_mut().zip(points) {
            *o = self.eval_with(&tw, q.x, q.y, &mut sx, &mut sy);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_mode_model() -> SpectralModel {
        let basis = SpectralBasis::new(3, 1.0, 1.0, 1.0).unwrap();
        let mut w = vec![0.0; 9];
        w[0] = 1.0;
        SpectralModel::from_weights(basis, w).unwrap()
    }

    #[test]
    fn omegas_increase() {
        let b = SpectralBasis::new(6, 1.0, 2.0, 1.5).unwrap();
        for j in 1..=6 {
            for k in 1..=6 {
                assert!(b.omega(j, k) > 0.0);
                if j < 6 {
                    assert!(b.omega(j + 1, k) > b.omega(j, k));
                }
                if k < 6 {
                    assert!(b.omega(j, k + 1) > b.omega(j, k));
                }
            }
        }
        assert!((b.omega(1, 1) - 1.5 * PI * (1.25f64).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn design_matrix_entries() {
        let b = SpectralBasis::new(2, 2.0, 3.0, 1.0).unwrap();
        let phi = build_design_matrix(&[[1.0, 1.5], [0.0, 0.0], [2.0, 3.0]], &b).unwrap();
        assert!((phi.values[(0, b.column(1, 1))] - 1.0).abs() < 1e-15);
        assert!(phi.values[(0, b.column(2, 1))].abs() < 1e-15);
        for row in 1..3 {
            for col in 0..4 {
                assert!(phi.values[(row, col)].abs() < 1e-15);
            }
        }
        assert!(build_design_matrix(&[[2.1, 0.0]], &b).is_err());
    }

    #[test]
    fn identity_design_shrinks_uniformly() {
        let phi = DesignMatrix { values: Mat::identity(4, 4), points: vec![[0.0; 2]; 4] };
        let y = [1.0, -2.0, 0.5, 3.0];
        for lambda in [0.0, 0.3, 2.0] {
            let (w, _) = ridge_fit_svd(&phi, &y, lambda).unwrap();
            for (a, b) in w.iter().zip(y) {
                assert!((a - b / (1.0 + lambda)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn orthogonal_design_has_flat_gcv() {
        let phi = DesignMatrix { values: Mat::identity(2, 2), points: vec![[0.0; 2]; 2] };
        let fit = RidgeFit::new(&phi, &[1.0, 2.0]).unwrap();
        for lambda in LambdaGrid::default().values().unwrap() {
            assert!((fit.gcv_score(lambda).unwrap() - 1.25).abs() < 1e-12 * 1.25, "lambda {lambda}");
        }
    }

    #[test]
    fn dof_examples() {
        let phi = DesignMatrix { values: Mat::identity(3, 3), points: vec![[0.0; 2]; 3] };
        let fit = RidgeFit::new(&phi, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(fit.effective_dof(0.0).unwrap(), 3.0);
        let mut col = Mat::<f64>::zeros(1, 1);
        col[(0, 0)] = 2.0;
        let fit = RidgeFit::new(&DesignMatrix { values: col, points: vec![[0.0; 2]] }, &[1.0]).unwrap();
        assert!((fit.effective_dof(1.0).unwrap() - 0.8).abs() < 1e-15);
        assert!(fit.effective_dof(-1.0).is_err());
    }

    #[test]
    fn rank_deficient_unregularized_fit_fails() {
        let mut values = Mat::<f64>::zeros(3, 2);
        for i in 0..3 {
            values[(i, 0)] = 1.0 + i as f64;
            values[(i, 1)] = 2.0 * (1.0 + i as f64);
        }
        let phi = DesignMatrix { values, points: vec![[0.0; 2]; 3] };
        let fit = RidgeFit::new(&phi, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(fit.rank(), 1);
        assert!(matches!(fit.weights(0.0), Err(Error::Singular(_))));
        assert!(fit.weights(1e-3).is_ok());
        assert_eq!(fit.effective_dof(0.0).unwrap(), 1.0);
    }

    #[test]
    fn invalid_inputs() {
        let phi = DesignMatrix { values: Mat::identity(2, 2), points: vec![[0.0; 2]; 2] };
        assert!(RidgeFit::new(&phi, &[1.0, f64::NAN]).is_err());
        assert!(RidgeFit::new(&phi, &[1.0]).is_err());
        let fit = RidgeFit::new(&phi, &[1.0, 2.0]).unwrap();
        assert!(fit.gcv_score(0.0).is_err());
        assert!(fit.weights(-1.0).is_err());
        assert!(select_lambda_gcv(&fit, &[]).is_err());
        assert!(select_lambda_gcv(&fit, &[1.0, -1.0]).is_err());
    }

    #[test]
    fn column_space_data_gcv_vanishes() {
        let mut values = Mat::<f64>::zeros(5, 2);
        for i in 0..5 {
            values[(i, 0)] = 1.0;
            values[(i, 1)] = i as f64;
        }
        let phi = DesignMatrix { values, points: vec![[0.0; 2]; 5] };
        let y: Vec<f64> = (0..5).map(|i| 2.0 - 0.5 * i as f64).collect();
        let fit = RidgeFit::new(&phi, &y).unwrap();
        assert!(fit.gcv_score(1e-14).unwrap() < 1e-20);
    }

    #[test]
    fn single_mode_prediction() {
        let m = single_mode_model();
        assert!((m.predict(0.5, 0.5, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let period = 2f64.sqrt();
        for &(x, y) in &[(0.3, 0.4), (0.9, 0.1)] {
            assert!((m.predict(x, y, period).unwrap() - m.predict(x, y, 0.0).unwrap()).abs() < 1e-13);
        }
        for t in [0.0, 0.7, 3.1] {
            assert!(m.predict(0.0, 0.4, t).unwrap().abs() < 1e-15);
            assert!(m.predict(1.0, 0.4, t).unwrap().abs() < 1e-15);
        }
        assert!(m.predict(1.2, 0.4, 0.0).is_err());
    }

    #[test]
    fn grid_prediction_matches_pointwise() {
        let basis = SpectralBasis::new(5, 1.0, 2.0, 1.0).unwrap();
        let w: Vec<f64> = (0..25).map(|i| ((i * 7) % 11) as f64 / 11.0 - 0.4).collect();
        let m = SpectralModel::from_weights(basis, w).unwrap();
        let g = m.predict_grid(7, 9, 0.37).unwrap();
        for j in 0..=9 {
            for i in 0..=7 {
                let p = m.predict(g.x(i), g.y(j), 0.37).unwrap();
                assert!((g.at(i, j) - p).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn json_round_trip_and_field_names() {
        let m = single_mode_model();
        let text = m.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["N", "L1", "L2", "c", "lambda", "edof", "seed", "weights"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back = SpectralModel::from_json(&text).unwrap();
        assert_eq!(back.weights, m.weights);
        assert!(SpectralModel::from_json(r#"{"N":1,"L1":1,"L2":1,"c":1,"lambda":0,"edof":1,"seed":0,"weights":[1,2]}"#).is_err());
    }
}
