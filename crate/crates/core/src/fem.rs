//! P1 finite elements in space with a three-level Crank-Nicolson scheme in time.
//!
//! The semi-discrete system `M U'' + c^2 K U = 0` is stepped with
//! `alpha = c^2 dt^2 / 2`. The left-hand matrix `M + alpha K` is factorized
//! once per solve and reused at every step.

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::{ColMut, Side};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::mesh::{ElementGeometry, Mesh};
use crate::metrics::{QuadPoint, SpaceTimeField};
use crate::problem::WaveProblem;
use crate::sparse::CsrMatrix;

/// Consistent P1 mass matrix of a triangle: `area / 12 * [[2,1,1],[1,2,1],[1,1,2]]`.
pub fn element_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

/// P1 stiffness matrix `(b_i b_j + c_i c_j) / (4 area)`.
pub fn element_stiffness(g: &ElementGeometry) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| (g.b[i] * g.b[j] + g.c[i] * g.c[j]) / (4.0 * g.area)))
}

fn assemble(mesh: &Mesh, local: impl Fn(&ElementGeometry) -> [[f64; 3]; 3]) -> CsrMatrix {
    let mut entries = Vec::with_capacity(9 * mesh.element_count());
    for (e, tri) in mesh.elements.iter().enumerate() {
        let g = mesh.element_geometry(e).expect("element ids come from the mesh");
        let block = local(&g);
        for (a, &ga) in tri.iter().enumerate() {
            for (b, &gb) in tri.iter().enumerate() {
                entries.push((ga, gb, block[a][b]));
            }
        }
    }
    let n = mesh.node_count();
    CsrMatrix::from_triplets(n, n, entries).expect("element node ids are valid")
}

/// Global mass matrix over all mesh nodes.
pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    assemble(mesh, |g| element_mass(g.area))
}

/// Global stiffness matrix over all mesh nodes.
pub fn assemble_stiffness(mesh: &Mesh) -> CsrMatrix {
    assemble(mesh, element_stiffness)
}

/// Eliminates the homogeneous Dirichlet nodes.
pub fn restrict_to_interior(a: &CsrMatrix, mesh: &Mesh) -> Result<CsrMatrix> {
    ensure(a.nrows() == mesh.node_count() && a.ncols() == mesh.node_count(), || {
        format!("matrix is {}x{}, mesh has {} nodes", a.nrows(), a.ncols(), mesh.node_count())
    })?;
    Ok(a.principal_submatrix(&mesh.interior, mesh.interior_count()))
}

/// Which three-level update is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CnVariant {
    /// `M (U+ - 2U + U-) / dt^2 + c^2 K (U+ + U-) / 2 = 0`, i.e.
    /// `(M + aK) U+ = 2M U - (M + aK) U-`. Second order, conserves the discrete energy.
    #[default]
    Centered,
    /// `(M + aK) U+ = (2M - aK) U - M U-`, stiffness averaged over the new and
    /// current levels. First order in time and dissipative.
    Lagged,
}

impl std::str::FromStr for CnVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centered" => Ok(CnVariant::Centered),
            "lagged" => Ok(CnVariant::Lagged),
            other => Err(Error::invalid(format!("unknown Crank-Nicolson variant {other:?}"))),
        }
    }
}

/// How the second time level `U1` is produced from `U0` at zero velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartRule {
    /// `U1 = U0 - a M^{-1} K U0`. Explicit, so large steps amplify rough modes.
    #[default]
    Taylor,
    /// `(M + aK) U1 = M U0`: the centered update at level 0 with `U-1 = U1`.
    /// Reuses the stepping factorization and never amplifies.
    Implicit,
}

impl std::str::FromStr for StartRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "taylor" => Ok(StartRule::Taylor),
            "implicit" => Ok(StartRule::Implicit),
            other => Err(Error::invalid(format!("unknown start rule {other:?}"))),
        }
    }
}

/// Interior mass and stiffness matrices for one mesh.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub mesh: Arc<Mesh>,
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    pub c: f64,
}

impl FemSystem {
    pub fn assemble(mesh: Arc<Mesh>, c: f64) -> Result<Self> {
        ensure(c.is_finite() && c > 0.0, || format!("wave speed must be positive, got {c}"))?;
        let mass = restrict_to_interior(&assemble_mass(&mesh), &mesh)?;
        let stiffness = restrict_to_interior(&assemble_stiffness(&mesh), &mesh)?;
        Ok(FemSystem { mesh, mass, stiffness, c })
    }

    pub fn for_problem(problem: &WaveProblem, nx: usize, ny: usize) -> Result<Self> {
        problem.validate()?;
        let mesh = Mesh::structured(problem.l1, problem.l2, nx, ny)?;
        FemSystem::assemble(Arc::new(mesh), problem.c)
    }

    pub fn unknowns(&self) -> usize {
        self.mass.nrows()
    }
}

/// Work counters for one time integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Factorizations of the stepping matrix `M + alpha K`.
    pub step_factorizations: usize,
    /// Factorizations of `M`, used once by the Taylor start.
    pub mass_factorizations: usize,
    pub triangular_solves: usize,
    pub matvecs: usize,
}

struct SpdFactor {
    llt: Llt<usize, f64>,
}

impl SpdFactor {
    fn new(a: &CsrMatrix, what: &str) -> Result<Self> {
        let lower = a.lower_to_faer()?;
        let llt = lower.sp_cholesky(Side::Lower).map_err(|e| {
            let min_diag = (0..a.nrows()).map(|i| a.get(i, i)).fold(f64::INFINITY, f64::min);
            Error::Numerical(format!(
                "Cholesky factorization of {what} failed ({e}); dimension {}, {} stored entries, smallest diagonal {min_diag:e}",
                a.nrows(),
                a.nnz()
            ))
        })?;
        Ok(SpdFactor { llt })
    }

    fn solve_in_place(&self, rhs: &mut [f64]) {
        self.llt.solve_in_place(ColMut::from_slice_mut(rhs));
    }
}

/// Nodal interior values at the uniform time levels `t_n = n dt`, `n = 0..=nt`.
#[derive(Debug, Clone)]
pub struct FemTrajectory {
    pub snapshots: Vec<Vec<f64>>,
    pub dt: f64,
    pub nt: usize,
    pub mesh: Arc<Mesh>,
    pub stats: SolveStats,
}

impl FemTrajectory {
    pub fn final_time(&self) -> f64 {
        self.dt * self.nt as f64
    }

    /// Full nodal vector (boundary zeros included) at level `n`.
    pub fn nodal(&self, n: usize) -> Vec<f64> {
        self.mesh.expand_interior(&self.snapshots[n])
    }

    /// Bracketing levels and blend weight for time `t`.
    pub(crate) fn time_bracket(&self, t: f64) -> Result<(usize, usize, f64)> {
        let t_end = self.final_time();
        ensure(t >= 0.0 && t <= t_end * (1.0 + 1e-12), || format!("time {t} outside [0, {t_end}]"))?;
        let s = (t / self.dt).clamp(0.0, self.nt as f64);
        let lo = (s.floor() as usize).min(self.nt.saturating_sub(1));
        let hi = (lo + 1).min(self.nt);
        Ok((lo, hi, s - lo as f64))
    }

    /// Levels and weight used for time `t` under `sampling`.
    fn time_weights(&self, t: f64, sampling: TimeSampling) -> Result<(usize, usize, f64)> {
        let (lo, hi, w) = self.time_bracket(t)?;
        Ok(match sampling {
            TimeSampling::Linear => (lo, hi, w),
            TimeSampling::Hold if w >= 1.0 - HOLD_SNAP => (hi, hi, 0.0),
            TimeSampling::Hold => (lo, lo, 0.0),
        })
    }

    fn at_barycentric(&self, level: usize, tri: [usize; 3], lam: [f64; 3]) -> f64 {
        let values = &self.snapshots[level];
        tri.iter()
            .zip(lam)
            .map(|(&g, l)| self.mesh.interior[g].map_or(0.0, |k| l * values[k]))
            .sum()
    }

    /// P1 interpolation in space, linear interpolation between time levels.
    pub fn eval(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        self.eval_sampled(x, y, t, TimeSampling::Linear)
    }

    /// P1 interpolation in space with the given reconstruction in time.
    pub fn eval_sampled(&self, x: f64, y: f64, t: f64, sampling: TimeSampling) -> Result<f64> {
        let (lo, hi, w) = self.time_weights(t, sampling)?;
        let (e, lam) = self.mesh.locate(x, y)?;
        let tri = self.mesh.elements[e];
        let a = self.at_barycentric(lo, tri, lam);
        if w == 0.0 {
            return Ok(a);
        }
        let b = self.at_barycentric(hi, tri, lam);
        Ok(a + w * (b - a))
    }

    /// View of the trajectory as a space-time field.
    pub fn field(&self, sampling: TimeSampling) -> TrajectoryField<'_> {
        TrajectoryField { trajectory: self, sampling }
    }
}

/// Relative slack for landing exactly on a stored level under [`TimeSampling::Hold`].
const HOLD_SNAP: f64 = 1e-9;

/// How a trajectory is read between its stored time levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeSampling {
    /// Linear blend of the two bracketing levels.
    #[default]
    Linear,
    /// Most recent stored level at or before `t`.
    Hold,
}

impl std::str::FromStr for TimeSampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(TimeSampling::Linear),
            "hold" => Ok(TimeSampling::Hold),
            other => Err(Error::invalid(format!("unknown time sampling {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrajectoryField<'a> {
    pub trajectory: &'a FemTrajectory,
    pub sampling: TimeSampling,
}

impl SpaceTimeField for TrajectoryField<'_> {
    fn eval_points(&self, points: &[QuadPoint], t: f64, out: &mut [f64]) -> Result<()> {
        ensure(out.len() == points.len(), || "output buffer length mismatch".into())?;
        let traj = self.trajectory;
        let (lo, hi, w) = traj.time_weights(t, self.sampling)?;
        for (o, q) in out.iter_mut().zip(points) {
            let (e, lam) = traj.mesh.locate(q.x, q.y)?;
            let tri = traj.mesh.elements[e];
            let a = traj.at_barycentric(lo, tri, lam);
            *o = if w == 0.0 { a } else { a + w * (traj.at_barycentric(hi, tri, lam) - a) };
        }
        Ok(())
    }
}

/// Integrates from `u0` (interior nodal values, zero initial velocity) over
/// `nt` steps of size `dt`, handing each level to `visit` as it is produced.
pub fn cn_solve_streaming(
    sys: &FemSystem,
    u0: &[f64],
    dt: f64,
    nt: usize,
    variant: CnVariant,
    start: StartRule,
    mut visit: impl FnMut(usize, &[f64]) -> Result<()>,
) -> Result<SolveStats> {
    let n = sys.unknowns();
    ensure(dt.is_finite() && dt > 0.0, || format!("time step must be positive, got {dt}"))?;
    ensure(nt >= 1, || "at least one time step is required".into())?;
    ensure(u0.len() == n, || format!("initial vector has {} entries, system has {n} unknowns", u0.len()))?;
    ensure(u0.iter().all(|v| v.is_finite()), || "initial data contains non-finite values".into())?;

    let mut stats = SolveStats::default();
    visit(0, u0)?;
    if n == 0 {
        for level in 1..=nt {
            visit(level, u0)?;
        }
        return Ok(stats);
    }

    let c2 = sys.c * sys.c;
    let alpha = 0.5 * c2 * dt * dt;
    let (m, k) = (&sys.mass, &sys.stiffness);

    let lhs = m.linear_combination(1.0, k, alpha)?;
    let factor = SpdFactor::new(&lhs, "M + alpha K")?;
    stats.step_factorizations += 1;

    let mut start = match start {
        StartRule::Taylor => {
            let mass_factor = SpdFactor::new(m, "the mass matrix")?;
            stats.mass_factorizations += 1;
            let mut accel = k.mul_vec(u0);
            mass_factor.solve_in_place(&mut accel);
            u0.iter().zip(&accel).map(|(u, a)| u - alpha * a).collect()
        }
        StartRule::Implicit => {
            let mut rhs = m.mul_vec(u0);
            factor.solve_in_place(&mut rhs);
            rhs
        }
    };
    stats.matvecs += 1;
    stats.triangular_solves += 2;
    let mut prev = u0.to_vec();
    let mut curr = std::mem::take(&mut start);
    visit(1, &curr)?;

    let (forward, backward) = match variant {
        CnVariant::Centered => (m.linear_combination(2.0, k, 0.0)?, lhs),
        CnVariant::Lagged => (m.linear_combination(2.0, k, -alpha)?, m.clone()),
    };

    let mut next = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for level in 2..=nt {
        forward.mul_vec_into(&curr, &mut next);
        backward.mul_vec_into(&prev, &mut scratch);
        stats.matvecs += 2;
        for (a, b) in next.iter_mut().zip(&scratch) {
            *a -= b;
        }
        factor.solve_in_place(&mut next);
        stats.triangular_solves += 2;
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite values at time level {level}")));
        }
        visit(level, &next)?;
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
    }
    Ok(stats)
}

/// Integrates and keeps every time level.
pub fn cn_solve(
    sys: &FemSystem,
    u0: &[f64],
    dt: f64,
    nt: usize,
    variant: CnVariant,
    start: StartRule,
) -> Result<FemTrajectory> {
    let mut snapshots = Vec::with_capacity(nt + 1);
    let stats = cn_solve_streaming(sys, u0, dt, nt, variant, start, |_, u| {
        snapshots.push(u.to_vec());
        Ok(())
    })?;
    Ok(FemTrajectory { snapshots, dt, nt, mesh: Arc::clone(&sys.mesh), stats })
}

/// Discrete energy between consecutive levels,
/// `|U+ - U|_M^2 / (2 dt^2) + c^2 / 4 (|U+|_K^2 + |U|_K^2)`.
///
/// Exactly conserved by [`CnVariant::Centered`].
pub fn discrete_energy(sys: &FemSystem, un: &[f64], un1: &[f64], dt: f64) -> Result<f64> {
    let n = sys.unknowns();
    ensure(un.len() == n && un1.len() == n, || {
        format!("snapshot lengths {} and {} do not match {n} unknowns", un.len(), un1.len())
    })?;
    ensure(dt > 0.0, || format!("time step must be positive, got {dt}"))?;
    let diff: Vec<f64> = un1.iter().zip(un).map(|(a, b)| a - b).collect();
    let kinetic = sys.mass.quadratic_form(&diff) / (2.0 * dt * dt);
    let potential = 0.25 * sys.c * sys.c * (sys.stiffness.quadratic_form(un1) + sys.stiffness.quadratic_form(un));
    Ok(kinetic + potential)
}
