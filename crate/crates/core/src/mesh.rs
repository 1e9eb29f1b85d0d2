//! Structured conforming triangulation of the rectangle.
//!
//! Nodes are numbered row-major (y outer, x inner). Every grid cell is split
//! along its lower-left to upper-right diagonal into two counter-clockwise
//! triangles, so element `2 * (j * nx + i)` is the lower triangle of cell
//! `(i, j)` and element `2 * (j * nx + i) + 1` the upper one.

use crate::error::{ensure, Error, Result};
use crate::grid::{cell_of, in_closed_interval, node_coord};

/// Signed area and the cyclic coordinate differences of a P1 triangle.
///
/// `b[i] = y[i+1] - y[i-1]`, `c[i] = x[i-1] - x[i+1]`, so the gradient of the
/// `i`-th barycentric coordinate is `(b[i], c[i]) / (2 * area)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub b: [f64; 3],
    pub c: [f64; 3],
}

pub fn triangle_geometry(p: [[f64; 2]; 3]) -> ElementGeometry {
    let mut b = [0.0; 3];
    let mut c = [0.0; 3];
    for i in 0..3 {
        let next = (i + 1) % 3;
        let prev = (i + 2) % 3;
        b[i] = p[next][1] - p[prev][1];
        c[i] = p[prev][0] - p[next][0];
    }
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    ElementGeometry { area, b, c }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub l1: f64,
    pub l2: f64,
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 3]>,
    /// Global node id to interior unknown id; `None` on the boundary.
    pub interior: Vec<Option<usize>>,
    /// Interior unknown id to global node id.
    pub interior_nodes: Vec<usize>,
    pub h: f64,
}

impl Mesh {
    pub fn structured(l1: f64, l2: f64, nx: usize, ny: usize) -> Result<Mesh> {
        ensure(l1.is_finite() && l1 > 0.0 && l2.is_finite() && l2 > 0.0, || {
            format!("mesh lengths must be positive, got {l1} x {l2}")
        })?;
        ensure(nx >= 1 && ny >= 1, || format!("mesh needs at least one interval per direction, got {nx} x {ny}"))?;

        let stride = nx + 1;
        let mut nodes = Vec::with_capacity(stride * (ny + 1));
        let mut interior = Vec::with_capacity(stride * (ny + 1));
        let mut interior_nodes = Vec::with_capacity(nx.saturating_sub(1) * ny.saturating_sub(1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([node_coord(i, nx, l1), node_coord(j, ny, l2)]);
                if i > 0 && i < nx && j > 0 && j < ny {
                    interior.push(Some(interior_nodes.len()));
                    interior_nodes.push(j * stride + i);
                } else {
                    interior.push(None);
                }
            }
        }

        let mut elements = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let p00 = j * stride + i;
                let p10 = p00 + 1;
                let p01 = p00 + stride;
                let p11 = p01 + 1;
                elements.push([p00, p10, p11]);
                elements.push([p00, p11, p01]);
            }
        }

        Ok(Mesh {
            nx,
            ny,
            l1,
            l2,
            nodes,
            elements,
            interior,
            interior_nodes,
            h: (l1 / nx as f64).max(l2 / ny as f64),
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn interior_count(&self) -> usize {
        self.interior_nodes.len()
    }

    pub fn vertices(&self, e: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.elements[e];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn element_geometry(&self, e: usize) -> Result<ElementGeometry> {
        ensure(e < self.elements.len(), || {
            format!("element id {e} out of range (mesh has {} elements)", self.elements.len())
        })?;
        Ok(triangle_geometry(self.vertices(e)))
    }

    /// Containing element and barycentric coordinates of a point in the closed rectangle.
    pub fn locate(&self, x: f64, y: f64) -> Result<(usize, [f64; 3])> {
        ensure(in_closed_interval(x, self.l1) && in_closed_interval(y, self.l2), || {
            format!("point ({x}, {y}) lies outside the mesh domain")
        })?;
        let (i, sx) = cell_of(x, self.nx, self.l1);
        let (j, sy) = cell_of(y, self.ny, self.l2);
        let cell = 2 * (j * self.nx + i);
        Ok(if sy <= sx {
            (cell, [1.0 - sx, sx - sy, sy])
        } else {
            (cell + 1, [1.0 - sy, sx, sy - sx])
        })
    }

    /// Evaluates the P1 interpolant of full nodal data at `(x, y)`.
    pub fn interpolate(&self, nodal: &[f64], x: f64, y: f64) -> Result<f64> {
        if nodal.len() != self.node_count() {
            return Err(Error::invalid(format!(
                "nodal vector has {} entries, mesh has {} nodes",
                nodal.len(),
                self.node_count()
            )));
        }
        let (e, lam) = self.locate(x, y)?;
        let tri = self.elements[e];
        Ok(lam[0] * nodal[tri[0]] + lam[1] * nodal[tri[1]] + lam[2] * nodal[tri[2]])
    }

    /// Scatters interior unknowns into a full nodal vector with zero boundary values.
    pub fn expand_interior(&self, interior_values: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.node_count()];
        for (k, &g) in self.interior_nodes.iter().enumerate() {
            full[g] = interior_values[k];
        }
        full
    }

    /// Samples `f` at the interior nodes (nodal interpolation).
    pub fn sample_interior(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.interior_nodes
            .iter()
            .map(|&g| {
                let [x, y] = self.nodes[g];
                f(x, y)
            })
            .collect()
    }
}
