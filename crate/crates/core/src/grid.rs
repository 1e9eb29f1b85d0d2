//! Uniform tensor grids over the rectangle and bilinear interpolation on them.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Nodal values on a uniform `(nx+1) x (ny+1)` grid covering `[0, l1] x [0, l2]`.
///
/// Values are stored y-major: `values[j * (nx + 1) + i]` is the value at
/// `(i * l1 / nx, j * l2 / ny)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub nx: usize,
    pub ny: usize,
    pub l1: f64,
    pub l2: f64,
    pub values: Vec<f64>,
}

impl Grid2 {
    pub fn new(nx: usize, ny: usize, l1: f64, l2: f64, values: Vec<f64>) -> Result<Self> {
        let g = Grid2 { nx, ny, l1, l2, values };
        g.check()?;
        Ok(g)
    }

    /// Shape checks, for grids that did not come through [`Grid2::new`].
    pub fn check(&self) -> Result<()> {
        let (nx, ny, l1, l2) = (self.nx, self.ny, self.l1, self.l2);
        ensure(nx >= 1 && ny >= 1, || format!("grid needs at least one cell, got {nx}x{ny}"))?;
        ensure(l1 > 0.0 && l2 > 0.0, || format!("grid lengths must be positive, got {l1}x{l2}"))?;
        ensure(self.values.len() == (nx + 1) * (ny + 1), || {
            format!("expected {} grid values, got {}", (nx + 1) * (ny + 1), self.values.len())
        })
    }

    /// Samples `f` at every grid node.
    pub fn from_fn(nx: usize, ny: usize, l1: f64, l2: f64, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            let y = node_coord(j, ny, l2);
            for i in 0..=nx {
                values.push(f(node_coord(i, nx, l1), y));
            }
        }
        Grid2::new(nx, ny, l1, l2, values)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.nx + 1) + i]
    }

    pub fn x(&self, i: usize) -> f64 {
        node_coord(i, self.nx, self.l1)
    }

    pub fn y(&self, j: usize) -> f64 {
        node_coord(j, self.ny, self.l2)
    }

    /// Tensor-product bilinear interpolation inside the containing cell.
    ///
    /// Exact at grid nodes and for every function of the form `a + bx + cy + dxy`.
    pub fn bilinear(&self, x: f64, y: f64) -> Result<f64> {
        ensure(in_closed_interval(x, self.l1) && in_closed_interval(y, self.l2), || {
            format!("point ({x}, {y}) lies outside [0, {}] x [0, {}]", self.l1, self.l2)
        })?;
        Ok(self.bilinear_unchecked(x, y))
    }

    pub(crate) fn bilinear_unchecked(&self, x: f64, y: f64) -> f64 {
        let (i, sx) = cell_of(x, self.nx, self.l1);
        let (j, sy) = cell_of(y, self.ny, self.l2);
        let stride = self.nx + 1;
        let v00 = self.values[j * stride + i];
        let v10 = self.values[j * stride + i + 1];
        let v01 = self.values[(j + 1) * stride + i];
        let v11 = self.values[(j + 1) * stride + i + 1];
        let lo = v00 + sx * (v10 - v00);
        let hi = v01 + sx * (v11 - v01);
        lo + sy * (hi - lo)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// True when every value on the outer rows and columns is exactly zero.
    /// Sets every boundary node to exactly zero.
    pub fn zero_boundary(&mut self) {
        let (nx, ny) = (self.nx, self.ny);
        for i in 0..=nx {
            self.values[i] = 0.0;
            self.values[ny * (nx + 1) + i] = 0.0;
        }
        for j in 0..=ny {
            self.values[j * (nx + 1)] = 0.0;
            self.values[j * (nx + 1) + nx] = 0.0;
        }
    }

    pub fn boundary_is_zero(&self) -> bool {
        (0..=self.nx).all(|i| self.at(i, 0) == 0.0 && self.at(i, self.ny) == 0.0)
            && (0..=self.ny).all(|j| self.at(0, j) == 0.0 && self.at(self.nx, j) == 0.0)
    }
}

#[inline]
pub(crate) fn node_coord(i: usize, n: usize, len: f64) -> f64 {
    // Exact endpoints so boundary nodes land on the boundary bit-for-bit.
    if i == n {
        len
    } else {
        len * i as f64 / n as f64
    }
}

#[inline]
pub(crate) fn in_closed_interval(v: f64, len: f64) -> bool {
    v >= 0.0 && v <= len
}

/// Cell index and local coordinate in `[0, 1]` of `v` on a uniform partition of `[0, len]`.
#[inline]
pub(crate) fn cell_of(v: f64, n: usize, len: f64) -> (usize, f64) {
    let s = v / len * n as f64;
    let i = (s.floor() as isize).clamp(0, n as isize - 1) as usize;
    (i, (s - i as f64).clamp(0.0, 1.0))
}
