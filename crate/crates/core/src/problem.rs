//! The governing problem: `u_tt = c^2 (u_xx + u_yy)` on `(0, l1) x (0, l2)`,
//! `u = 0` on the boundary, `u(., 0) = u0` and zero initial velocity.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::grid::Grid2;

/// Default center and radius of the mollifier bump.
pub const MOLLIFIER_CENTER: (f64, f64) = (0.3, 0.7);
pub const MOLLIFIER_RADIUS: f64 = 0.24;

/// `x(1-x)y(1-y)`, the smooth polynomial profile on the unit square.
pub fn ic_polynomial(x: f64, y: f64) -> f64 {
    x * (1.0 - x) * y * (1.0 - y)
}

/// Friedrichs-type bump `exp(-R^2 / (R^2 - r^2))` for `r < R`, zero outside.
pub fn ic_mollifier(x: f64, y: f64, x0: f64, y0: f64, radius: f64) -> f64 {
    let r2 = (x - x0).powi(2) + (y - y0).powi(2);
    let rr = radius * radius;
    if r2 < rr {
        (-rr / (rr - r2)).exp()
    } else {
        0.0
    }
}

/// Initial displacement selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialCondition {
    Polynomial,
    Mollifier { x0: f64, y0: f64, radius: f64 },
    /// `sin(pi x / l1) sin(pi y / l2)`; the exact solution is known.
    SingleMode,
    Zero,
    /// Arbitrary data given as nodal values, bilinearly interpolated.
    Grid(Arc<Grid2>),
}

impl InitialCondition {
    pub fn mollifier() -> Self {
        InitialCondition::Mollifier {
            x0: MOLLIFIER_CENTER.0,
            y0: MOLLIFIER_CENTER.1,
            radius: MOLLIFIER_RADIUS,
        }
    }

    /// Short label used in reports and file names.
    pub fn label(&self) -> &'static str {
        match self {
            InitialCondition::Polynomial => "polynomial",
            InitialCondition::Mollifier { .. } => "mollifier",
            InitialCondition::SingleMode => "single-mode",
            InitialCondition::Zero => "zero",
            InitialCondition::Grid(_) => "grid",
        }
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polynomial" => Ok(InitialCondition::Polynomial),
            "mollifier" => Ok(InitialCondition::mollifier()),
            "single-mode" | "single_mode" => Ok(InitialCondition::SingleMode),
            "zero" => Ok(InitialCondition::Zero),
            other => Err(Error::invalid(format!("unknown initial condition {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveProblem {
    pub l1: f64,
    pub l2: f64,
    pub c: f64,
    pub t_final: f64,
    pub ic: InitialCondition,
}

impl WaveProblem {
    /// Unit square, `c = 1`, `T = 1`.
    pub fn unit_square(ic: InitialCondition) -> Self {
        WaveProblem { l1: 1.0, l2: 1.0, c: 1.0, t_final: 1.0, ic }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("l1", self.l1), ("l2", self.l2), ("c", self.c), ("t_final", self.t_final)] {
            ensure(v.is_finite() && v > 0.0, || format!("{name} must be positive and finite, got {v}"))?;
        }
        match &self.ic {
            InitialCondition::Polynomial => ensure(self.l1 == 1.0 && self.l2 == 1.0, || {
                "the polynomial initial condition is defined on the unit square only".into()
            }),
            InitialCondition::Mollifier { radius, .. } => {
                ensure(*radius > 0.0, || format!("mollifier radius must be positive, got {radius}"))
            }
            InitialCondition::Grid(g) => {
                g.check()?;
                ensure(g.l1 == self.l1 && g.l2 == self.l2, || {
                    "initial-condition grid does not cover the problem domain".into()
                })
            }
            InitialCondition::SingleMode | InitialCondition::Zero => Ok(()),
        }
    }

    /// Initial displacement `u0(x, y)`.
    pub fn u0(&self, x: f64, y: f64) -> f64 {
        match &self.ic {
            InitialCondition::Polynomial => ic_polynomial(x, y),
            InitialCondition::Mollifier { x0, y0, radius } => ic_mollifier(x, y, *x0, *y0, *radius),
            InitialCondition::SingleMode => (PI * x / self.l1).sin() * (PI * y / self.l2).sin(),
            InitialCondition::Zero => 0.0,
            InitialCondition::Grid(g) => g.bilinear_unchecked(x, y),
        }
    }

    /// Angular frequency of the `(j, k)` standing wave.
    pub fn omega(&self, j: usize, k: usize) -> f64 {
        let (a, b) = (j as f64 / self.l1, k as f64 / self.l2);
        self.c * PI * (a * a + b * b).sqrt()
    }

    /// Closed-form solution, when one is available for the chosen initial data.
    pub fn exact(&self, x: f64, y: f64, t: f64) -> Option<f64> {
        match self.ic {
            InitialCondition::SingleMode => Some(self.u0(x, y) * (self.omega(1, 1) * t).cos()),
            InitialCondition::Zero => Some(0.0),
            _ => None,
        }
    }
}
