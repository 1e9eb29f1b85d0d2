//! Degrees-of-freedom matching between the surrogate and the FEM solver.
//!
//! The FEM count is interior unknowns times stored time levels. With `n`
//! intervals per direction and `dt = T / n` there are `n + 1` levels, so the
//! matched resolution solves `(n - 1)^2 (n + 1) = dof_ep`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub dof_ep: f64,
    /// Intervals per direction.
    pub n: usize,
    pub dt: f64,
    /// Time steps; the trajectory holds `nt + 1` levels.
    pub nt: usize,
    pub dof_cn: u64,
    pub mismatch: f64,
    /// Real root of the matching cubic.
    pub root: f64,
}

pub fn dof_cn(n: usize, levels: usize) -> Result<u64> {
    ensure(n >= 2, || format!("n = {n} leaves no interior nodes"))?;
    ensure(levels >= 1, || "at least one time level is required".into())?;
    let interior = (n as u64 - 1).pow(2);
    Ok(interior * levels as u64)
}

fn cubic(x: f64) -> f64 {
    (x - 1.0).powi(2) * (x + 1.0)
}

/// Real root above 1 of `(x - 1)^2 (x + 1) = target`, by Newton's method
/// safeguarded with a bisection bracket.
pub fn cubic_root(target: f64) -> Result<f64> {
    ensure(target.is_finite() && target >= 1.0, || format!("DoF target must be >= 1, got {target}"))?;
    // g(1) = -target < 0 and g(1 + target^(1/3) + 1) > 0.
    let (mut lo, mut hi) = (1.0, target.cbrt() + 2.0);
    let mut x = target.cbrt() + 1.0;
    for _ in 0..200 {
        let g = cubic(x) - target;
        if g.abs() <= 1e-13 * target {
            break;
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dg = (x - 1.0) * (3.0 * x + 1.0);
        let newton = x - g / dg;
        x = if dg > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(x)
}

/// Matched FEM resolution for a surrogate effective DoF.
///
/// Picks `n` among the floor and ceiling of the cubic root (never below 2)
/// minimizing `|dof_cn - dof_ep|`; ties go to the smaller `n`.
pub fn match_cn_to_dof(dof_ep: f64, t_final: f64) -> Result<MatchResult> {
    ensure(t_final.is_finite() && t_final > 0.0, || format!("final time must be positive, got {t_final}"))?;
    let root = cubic_root(dof_ep)?;
    let lo = (root.floor() as usize).max(2);
    let hi = (root.ceil() as usize).max(2);
    let score = |n: usize| -> Result<(u64, f64)> {
        let d = dof_cn(n, n + 1)?;
        Ok((d, (d as f64 - dof_ep).abs()))
    };
    let (d_lo, m_lo) = score(lo)?;
    let (d_hi, m_hi) = score(hi)?;
    let (n, dof, mismatch) = if m_hi < m_lo { (hi, d_hi, m_hi) } else { (lo, d_lo, m_lo) };
    Ok(MatchResult { dof_ep, n, dt: t_final / n as f64, nt: n, dof_cn: dof, mismatch, root })
}
