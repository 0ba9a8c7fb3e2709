//! Discrete scalar fields on radial/line meshes and on uniform 2D grids.

use crate::error::{invalid, Error, Result};
use crate::geometry::WarpedMetric;
use crate::math;
use crate::quad;
use alloc::format;
use alloc::vec::Vec;

/// Geometry carried by a 1D mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geom1d {
    /// The flat line, n = 1.
    Line,
    /// Radial coordinate s on a warped product.
    Radial(WarpedMetric),
}

/// Uniform 1D mesh with finite-volume weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1d {
    pub x0: f64,
    pub h: f64,
    pub geom: Geom1d,
    volumes: Vec<f64>,
    faces: Vec<f64>,
}

impl Mesh1d {
    /// `len` nodes x0, x0+h, … .
    pub fn new(geom: Geom1d, x0: f64, h: f64, len: usize) -> Result<Mesh1d> {
        if len < 5 || !(h > 0.0) {
            return Err(invalid(format!("mesh needs ≥ 5 nodes and h > 0 (got {len}, {h})")));
        }
        if let Geom1d::Radial(m) = geom {
            m.check_domain(x0)?;
        }
        let density = |x: f64| match geom {
            Geom1d::Line => 1.0,
            Geom1d::Radial(m) => m.area(x),
        };
        let x_end = x0 + h * (len - 1) as f64;
        let mut volumes = Vec::with_capacity(len);
        for i in 0..len {
            let x = x0 + h * i as f64;
            let a = (x - 0.5 * h).max(x0);
            let b = (x + 0.5 * h).min(x_end);
            let v = match geom {
                Geom1d::Line => b - a,
                Geom1d::Radial(_) => {
                    // two GL5 panels are exact for the polynomial warps and plenty otherwise
                    let mid = 0.5 * (a + b);
                    quad::gl5(density, a, mid) + quad::gl5(density, mid, b)
                }
            };
            volumes.push(v);
        }
        let faces = (0..len - 1).map(|i| density(x0 + h * (i as f64 + 0.5))).collect();
        Ok(Mesh1d { x0, h, geom, volumes, faces })
    }

    /// Mesh covering [a, b] with spacing as close to `h` as divides the interval.
    pub fn spanning(geom: Geom1d, a: f64, b: f64, h: f64) -> Result<Mesh1d> {
        if !(b > a) {
            return Err(invalid(format!("degenerate interval [{a}, {b}]")));
        }
        let cells = math::ceil((b - a) / h - 1e-9).max(4.0) as usize;
        Mesh1d::new(geom, a, (b - a) / cells as f64, cells + 1)
    }

    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.h * i as f64
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.len() - 1)
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        match self.geom {
            Geom1d::Line => 1,
            Geom1d::Radial(m) => m.n,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match self.geom {
            Geom1d::Line => 1.0,
            Geom1d::Radial(m) => m.area(x),
        }
    }

    /// Control volume of node i.
    pub fn volume(&self, i: usize) -> f64 {
        self.volumes[i]
    }

    /// Area of the face between nodes i and i+1.
    pub fn face(&self, i: usize) -> f64 {
        self.faces[i]
    }

    /// High-order quadrature weights (Simpson times the volume density).
    pub fn quad_weights(&self) -> Vec<f64> {
        let w = quad::simpson_weights(self.len(), self.h);
        (0..self.len()).map(|i| w[i] * self.density(self.x(i))).collect()
    }

    /// Index of the node nearest to x (clamped).
    pub fn nearest(&self, x: f64) -> usize {
        let k = math::round((x - self.x0) / self.h);
        (k.max(0.0) as usize).min(self.len() - 1)
    }

    /// Simpson quadrature of values·density over nodes i..=j.
    pub fn integrate_nodes(&self, values: &[f64], i: usize, j: usize) -> f64 {
        if j <= i {
            return 0.0;
        }
        let w = quad::simpson_weights(j - i + 1, self.h);
        (i..=j).map(|k| w[k - i] * values[k] * self.density(self.x(k))).sum()
    }

    /// Index of the node sitting at x, if there is one.
    pub fn node_at(&self, x: f64) -> Option<usize> {
        let k = self.nearest(x);
        ((self.x(k) - x).abs() <= 1e-9 * self.h).then_some(k)
    }

    /// Fourth-order derivative of nodal data (one-sided five-point stencils at the ends).
    pub fn derivative(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let h = self.h;
        let mut d = alloc::vec![0.0; n];
        for i in 0..n {
            d[i] = if i >= 2 && i + 2 < n {
                (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h)
            } else if i < 2 {
                let j = 0;
                one_sided(&v[j..j + 5], i - j, h)
            } else {
                let j = n - 5;
                one_sided(&v[j..j + 5], i - j, h)
            };
        }
        d
    }

    /// Second-order centered derivative (one-sided three-point at the ends).
    pub fn derivative2(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let h = self.h;
        (0..n)
            .map(|i| {
                if i == 0 {
                    (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
                } else if i == n - 1 {
                    (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
                } else {
                    (v[i + 1] - v[i - 1]) / (2.0 * h)
                }
            })
            .collect()
    }
}

// derivative at local index k of the five samples u[0..5] on a uniform grid
fn one_sided(u: &[f64], k: usize, h: f64) -> f64 {
    const C: [[f64; 5]; 5] = [
        [-25.0, 48.0, -36.0, 16.0, -3.0],
        [-3.0, -10.0, 18.0, -6.0, 1.0],
        [1.0, -8.0, 0.0, 8.0, -1.0],
        [-1.0, 6.0, -18.0, 10.0, 3.0],
        [3.0, -16.0, 36.0, -48.0, 25.0],
    ];
    (0..5).map(|j| C[k][j] * u[j]).sum::<f64>() / (12.0 * h)
}

/// Uniform 2D grid on [x0, x0+(nx−1)h] × [y0, y0+(ny−1)h]. `active` marks the
/// nodes that are unknowns; everything else carries Dirichlet data.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2d {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub active: Vec<bool>,
}

impl Grid2d {
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + self.h * i as f64, self.y0 + self.h * j as f64)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell-centered gradient of nodal data for cell (i, j)–(i+1, j+1).
    pub fn cell_gradient(&self, v: &[f64], i: usize, j: usize) -> (f64, f64) {
        let a = v[self.idx(i, j)];
        let b = v[self.idx(i + 1, j)];
        let c = v[self.idx(i, j + 1)];
        let d = v[self.idx(i + 1, j + 1)];
        let h2 = 2.0 * self.h;
        ((b - a + d - c) / h2, (c - a + d - b) / h2)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + self.h * (i as f64 + 0.5), self.y0 + self.h * (j as f64 + 0.5))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    Mesh(Mesh1d),
    Grid(Grid2d),
}

/// Values on a mesh or grid, tagged with p and an optional time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub layout: Layout,
    pub values: Vec<f64>,
    pub p: f64,
    pub t: Option<f64>,
}

impl ScalarField {
    pub fn on_mesh(mesh: Mesh1d, values: Vec<f64>, p: f64) -> Result<ScalarField> {
        if values.len() != mesh.len() {
            return Err(Error::Mismatch(format!("{} values for {} nodes", values.len(), mesh.len())));
        }
        Ok(ScalarField { layout: Layout::Mesh(mesh), values, p, t: None })
    }

    pub fn sample_mesh(mesh: Mesh1d, p: f64, f: impl Fn(f64) -> f64) -> ScalarField {
        let values = (0..mesh.len()).map(|i| f(mesh.x(i))).collect();
        ScalarField { layout: Layout::Mesh(mesh), values, p, t: None }
    }

    pub fn on_grid(grid: Grid2d, values: Vec<f64>, p: f64) -> Result<ScalarField> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        Ok(ScalarField { layout: Layout::Grid(grid), values, p, t: None })
    }

    pub fn mesh(&self) -> Option<&Mesh1d> {
        match &self.layout {
            Layout::Mesh(m) => Some(m),
            Layout::Grid(_) => None,
        }
    }

    pub fn grid(&self) -> Option<&Grid2d> {
        match &self.layout {
            Layout::Grid(g) => Some(g),
            Layout::Mesh(_) => None,
        }
    }

    pub fn with_values(&self, values: Vec<f64>) -> ScalarField {
        ScalarField { layout: self.layout.clone(), values, p: self.p, t: self.t }
    }

    pub fn with_p(mut self, p: f64) -> ScalarField {
        self.p = p;
        self
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn same_layout(&self, other: &ScalarField) -> bool {
        self.layout == other.layout
    }

    /// |∇·| at mesh nodes (fourth-order) for mesh fields.
    pub fn mesh_gradient(&self) -> Option<Vec<f64>> {
        self.mesh().map(|m| m.derivative(&self.values))
    }
}
