//! Quadrature-based error measurement against a gridded reference solution.
//!
//! Space: four-point degree-3 rule on every triangle of the evaluation mesh,
//! with the reference bilinearly interpolated at the quadrature points.
//! Time: composite Simpson rule over a uniform evaluation grid, with the
//! reference linearly interpolated between its stored levels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::grid::Grid2;
use crate::mesh::Mesh;
use crate::problem::WaveProblem;

/// Barycentric nodes and unit-area weights of the degree-3 triangle rule.
pub const TRIANGLE_RULE: [([f64; 3], f64); 4] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], -27.0 / 48.0),
    ([0.6, 0.2, 0.2], 25.0 / 48.0),
    ([0.2, 0.6, 0.2], 25.0 / 48.0),
    ([0.2, 0.2, 0.6], 25.0 / 48.0),
];

/// A quadrature point with its weight already scaled by the element area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

pub fn triangle_quadrature_points(p: [[f64; 2]; 3]) -> [QuadPoint; 4] {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs();
    TRIANGLE_RULE.map(|(lam, w)| QuadPoint {
        x: lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0],
        y: lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1],
        weight: w * area,
    })
}

/// All quadrature points of a mesh, element by element.
pub fn mesh_quadrature_points(mesh: &Mesh) -> Vec<QuadPoint> {
    (0..mesh.element_count()).flat_map(|e| triangle_quadrature_points(mesh.vertices(e))).collect()
}

pub fn triangle_quadrature_integral(f: impl Fn(f64, f64) -> f64, mesh: &Mesh) -> f64 {
    mesh_quadrature_points(mesh).iter().map(|q| q.weight * f(q.x, q.y)).sum()
}

/// Composite Simpson weight convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimpsonRule {
    /// `(dt/3) (1, 4, 2, 4, ..., 2, 4, 1)`; exact for cubics.
    #[default]
    Standard,
    /// Same as `Standard` but with the first weight halved. Not exact for
    /// constants; kept for side-by-side comparison only.
    HalvedFirst,
}

/// Composite Simpson weights on `nt + 1` uniform samples of `[0, t_final]`.
pub fn simpson_weights(nt: usize, t_final: f64, rule: SimpsonRule) -> Result<Vec<f64>> {
    ensure(nt >= 2 && nt % 2 == 0, || format!("Simpson's rule needs an even interval count >= 2, got {nt}"))?;
    let h = t_final / nt as f64;
    let mut w: Vec<f64> = (0..=nt)
        .map(|i| {
            let c = if i == 0 || i == nt {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();
    if rule == SimpsonRule::HalvedFirst {
        w[0] *= 0.5;
    }
    Ok(w)
}

/// Anything that can be evaluated on a batch of spatial points at a fixed time.
pub trait SpaceTimeField {
    fn eval_points(&self, points: &[QuadPoint], t: f64, out: &mut [f64]) -> Result<()>;
}

impl<F: Fn(f64, f64, f64) -> f64> SpaceTimeField for F {
    fn eval_points(&self, points: &[QuadPoint], t: f64, out: &mut [f64]) -> Result<()> {
        for (o, q) in out.iter_mut().zip(points) {
            *o = self(q.x, q.y, t);
        }
        Ok(())
    }
}

/// Fine-grid solution stored at uniform time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub dt_ref: f64,
    pub nt_ref: usize,
    /// Time-major, then y-major, then x.
    pub values: Vec<f64>,
    pub problem: WaveProblem,
}

impl ReferenceSolution {
    pub fn level_len(&self) -> usize {
        (self.grid_nx + 1) * (self.grid_ny + 1)
    }

    pub fn level(&self, k: usize) -> &[f64] {
        let n = self.level_len();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn slice(&self, k: usize) -> Grid2 {
        Grid2 {
            nx: self.grid_nx,
            ny: self.grid_ny,
            l1: self.problem.l1,
            l2: self.problem.l2,
            values: self.level(k).to_vec(),
        }
    }

    pub fn final_time(&self) -> f64 {
        self.dt_ref * self.nt_ref as f64
    }

    fn bracket(&self, t: f64) -> Result<(usize, usize, f64)> {
        let t_end = self.final_time();
        ensure(t >= 0.0 && t <= t_end * (1.0 + 1e-12), || format!("time {t} outside [0, {t_end}]"))?;
        let s = (t / self.dt_ref).clamp(0.0, self.nt_ref as f64);
        let lo = (s.floor() as usize).min(self.nt_ref.saturating_sub(1));
        let hi = (lo + 1).min(self.nt_ref);
        let w = s - lo as f64;
        // Snap to stored levels so queries at level times are exact.
        Ok(if w <= 1e-12 { (lo, lo, 0.0) } else if w >= 1.0 - 1e-12 { (hi, hi, 0.0) } else { (lo, hi, w) })
    }

    /// Linear blend of the two reference levels bracketing `t`.
    pub fn time_interp(&self, t: f64) -> Result<Grid2> {
        let (lo, hi, w) = self.bracket(t)?;
        let values = if lo == hi {
            self.level(lo).to_vec()
        } else {
            self.level(lo).iter().zip(self.level(hi)).map(|(a, b)| a + w * (b - a)).collect()
        };
        Grid2::new(self.grid_nx, self.grid_ny, self.problem.l1, self.problem.l2, values)
    }

    fn bilinear_at_level(&self, k: usize, x: f64, y: f64) -> f64 {
        let view = GridView { nx: self.grid_nx, ny: self.grid_ny, l1: self.problem.l1, l2: self.problem.l2, values: self.level(k) };
        view.bilinear(x, y)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl SpaceTimeField for ReferenceSolution {
    fn eval_points(&self, points: &[QuadPoint], t: f64, out: &mut [f64]) -> Result<()> {
        let (lo, hi, w) = self.bracket(t)?;
        for (o, q) in out.iter_mut().zip(points) {
            let a = self.bilinear_at_level(lo, q.x, q.y);
            *o = if lo == hi { a } else { a + w * (self.bilinear_at_level(hi, q.x, q.y) - a) };
        }
        Ok(())
    }
}

/// Borrowed grid level, so evaluation does not copy reference slices.
struct GridView<'a> {
    nx: usize,
    ny: usize,
    l1: f64,
    l2: f64,
    values: &'a [f64],
}

impl GridView<'_> {
    fn bilinear(&self, x: f64, y: f64) -> f64 {
        let (i, sx) = crate::grid::cell_of(x, self.nx, self.l1);
        let (j, sy) = crate::grid::cell_of(y, self.ny, self.l2);
        let stride = self.nx + 1;
        let v = self.values;
        let lo = v[j * stride + i] + sx * (v[j * stride + i + 1] - v[j * stride + i]);
        let hi = v[(j + 1) * stride + i] + sx * (v[(j + 1) * stride + i + 1] - v[(j + 1) * stride + i]);
        lo + sy * (hi - lo)
    }
}

pub fn bilinear_interp(slice: &Grid2, x: f64, y: f64) -> Result<f64> {
    slice.bilinear(x, y)
}

pub fn time_interp(reference: &ReferenceSolution, t: f64) -> Result<Grid2> {
    reference.time_interp(t)
}

/// `|| u_h - ref ||_{L2(Omega)}` with the reference bilinearly interpolated at
/// the quadrature points of `mesh`.
pub fn spatial_l2_error(u_h: impl Fn(f64, f64) -> f64, ref_at_t: &Grid2, mesh: &Mesh) -> Result<f64> {
    let mut sum = 0.0;
    for q in mesh_quadrature_points(mesh) {
        let d = u_h(q.x, q.y) - ref_at_t.bilinear(q.x, q.y)?;
        sum += q.weight * d * d;
    }
    Ok(sum.sqrt())
}

pub fn linf_l2_error(per_snapshot: &[f64]) -> Result<f64> {
    ensure(!per_snapshot.is_empty(), || "no snapshot errors to reduce".into())?;
    Ok(per_snapshot.iter().copied().fold(0.0, f64::max))
}

pub fn relative_error(abs_err: f64, ref_norm: f64) -> Result<f64> {
    ensure(ref_norm > 0.0, || format!("reference norm must be positive, got {ref_norm}"))?;
    Ok(abs_err / ref_norm)
}

/// Error summary for one solver against the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub st_l2: f64,
    pub st_rel: f64,
    pub linf_l2: f64,
    pub linf_rel: f64,
    pub ref_st_norm: f64,
    pub ref_linf_norm: f64,
    /// Spatial L2 error `E_n` at each evaluation time.
    pub per_snapshot: Vec<f64>,
    /// Wall-clock durations in seconds.
    pub timings: BTreeMap<String, f64>,
}

/// Evaluates `solution` and `reference` at the quadrature points of `mesh` on
/// `nt_eval + 1` uniform times and reduces to space-time and max-in-time norms.
pub fn evaluate_errors(
    solution: &dyn SpaceTimeField,
    reference: &ReferenceSolution,
    mesh: &Mesh,
    nt_eval: usize,
    rule: SimpsonRule,
) -> Result<ErrorReport> {
    let t_final = reference.problem.t_final;
    let weights = simpson_weights(nt_eval, t_final, rule)?;
    ensure(mesh.l1 == reference.problem.l1 && mesh.l2 == reference.problem.l2, || {
        "evaluation mesh does not cover the reference domain".into()
    })?;
    let points = mesh_quadrature_points(mesh);
    let mut u = vec![0.0; points.len()];
    let mut r = vec![0.0; points.len()];

    let mut per_snapshot = Vec::with_capacity(nt_eval + 1);
    let (mut err_sq, mut ref_sq, mut ref_linf) = (0.0, 0.0, 0.0f64);
    for (n, w) in weights.iter().enumerate() {
        let t = if n == nt_eval { t_final } else { t_final * n as f64 / nt_eval as f64 };
        solution.eval_points(&points, t, &mut u)?;
        reference.eval_points(&points, t, &mut r)?;
        let (mut e2, mut r2) = (0.0, 0.0);
        for ((q, a), b) in points.iter().zip(&u).zip(&r) {
            e2 += q.weight * (a - b) * (a - b);
            r2 += q.weight * b * b;
        }
        if !(e2.is_finite() && r2.is_finite()) {
            return Err(Error::Numerical(format!("non-finite spatial error at t = {t}")));
        }
        per_snapshot.push(e2.sqrt());
        ref_linf = ref_linf.max(r2.sqrt());
        err_sq += w * e2;
        ref_sq += w * r2;
    }

    let st_l2 = err_sq.max(0.0).sqrt();
    let ref_st_norm = ref_sq.max(0.0).sqrt();
    let linf_l2 = linf_l2_error(&per_snapshot)?;
    Ok(ErrorReport {
        st_l2,
        st_rel: relative_error(st_l2, ref_st_norm)?,
        linf_l2,
        linf_rel: relative_error(linf_l2, ref_linf)?,
        ref_st_norm,
        ref_linf_norm: ref_linf,
        per_snapshot,
        timings: BTreeMap::new(),
    })
}

/// Space-time L2 error only.
pub fn space_time_l2_error(
    solution: &dyn SpaceTimeField,
    reference: &ReferenceSolution,
    mesh: &Mesh,
    nt_eval: usize,
    rule: SimpsonRule,
) -> Result<f64> {
    let t_final = reference.problem.t_final;
    let weights = simpson_weights(nt_eval, t_final, rule)?;
    let points = mesh_quadrature_points(mesh);
    let mut u = vec![0.0; points.len()];
    let mut r = vec![0.0; points.len()];
    let mut err_sq = 0.0;
    for (n, w) in weights.iter().enumerate() {
        let t = if n == nt_eval { t_final } else { t_final * n as f64 / nt_eval as f64 };
        solution.eval_points(&points, t, &mut u)?;
        reference.eval_points(&points, t, &mut r)?;
        let e2: f64 = points.iter().zip(&u).zip(&r).map(|((q, a), b)| q.weight * (a - b) * (a - b)).sum();
        err_sq += w * e2;
    }
    Ok(err_sq.max(0.0).sqrt())
}
