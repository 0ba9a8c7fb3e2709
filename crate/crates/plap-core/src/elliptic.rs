//! The p-harmonic equation div(|∇v|^{p−2}∇v) = 0, its log transform
//! u = −(p−1) log v, and checkers for the interior, global and boundary
//! gradient bounds.

use crate::error::{invalid, Error, Result};
use crate::field::{Geom1d, Grid2d, Layout, Mesh1d, ScalarField};
use crate::geometry::{curvature_bounds, MetricName, WarpedMetric};
use crate::linalg::{pcg, Triplets};
use crate::math;
use crate::quad::{self, Improper};
use crate::report::EstimateReport;
use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// A = id + (p−2)∇u⊗∇u/f and its inverse a = id − ((p−2)/(p−1))∇u⊗∇u/f in an
/// orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropyTensor {
    pub p: f64,
    pub grad: Vec<f64>,
    pub f: f64,
}

impl AnisotropyTensor {
    pub fn new(grad: &[f64], p: f64) -> Result<AnisotropyTensor> {
        let f: f64 = grad.iter().map(|g| g * g).sum();
        if !(f > 0.0) {
            return Err(Error::Degenerate("anisotropy tensor needs ∇u ≠ 0".into()));
        }
        if !(p > 1.0) {
            return Err(invalid(format!("p = {p} must exceed 1")));
        }
        Ok(AnisotropyTensor { p, grad: grad.to_vec(), f })
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    /// A^{ij}
    pub fn upper(&self, i: usize, j: usize) -> f64 {
        let d = if i == j { 1.0 } else { 0.0 };
        d + (self.p - 2.0) * self.grad[i] * self.grad[j] / self.f
    }

    /// a_{ij}
    pub fn lower(&self, i: usize, j: usize) -> f64 {
        let d = if i == j { 1.0 } else { 0.0 };
        d - (self.p - 2.0) / (self.p - 1.0) * self.grad[i] * self.grad[j] / self.f
    }

    /// |T|²_A = A^{ik}A^{jl}T_{ij}T_{kl} for a row-major n×n tensor.
    pub fn norm2(&self, t: &[f64]) -> f64 {
        let n = self.dim();
        // B = A T A, then |T|²_A = Σ B_kl T_kl
        let mut at = vec![0.0; n * n];
        for i in 0..n {
            for l in 0..n {
                at[i * n + l] = (0..n).map(|k| self.upper(i, k) * t[k * n + l]).sum();
            }
        }
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let b: f64 = (0..n).map(|l| at[i * n + l] * self.upper(l, j)).sum();
                s += b * t[i * n + j];
            }
        }
        s
    }

    /// Eigenvalues, ascending: p−1 along ∇u and 1 on its complement.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e = vec![1.0; self.dim()];
        e[0] = self.p - 1.0;
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    /// max |(A a − I)_{ij}|
    pub fn inverse_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| self.upper(i, k) * self.lower(k, j)).sum();
                let d = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(math::abs(s - d));
            }
        }
        worst
    }
}

/// Radial p-harmonic profile together with its first-integral constant.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub field: ScalarField,
    /// B in v = v_a + B∫ w^{−(n−1)/(p−1)}.
    pub b: f64,
    /// max over interior nodes of the radial operator applied to v.
    pub residual: f64,
}

/// v(s) = v_a + B∫_{s_a}^s w^{−(n−1)/(p−1)} with v(s_b) = v_b, sampled at spacing ≈ h.
pub fn radial_p_harmonic(
    m: &WarpedMetric,
    p: f64,
    s_a: f64,
    s_b: f64,
    v_a: f64,
    v_b: f64,
    h: f64,
) -> Result<RadialSolution> {
    if !(p > 1.0) {
        return Err(invalid(format!("p = {p} must exceed 1")));
    }
    if !(s_a > 0.0 && s_b > s_a) {
        return Err(Error::Degenerate(format!("radial interval [{s_a}, {s_b}]")));
    }
    if !(v_a > 0.0 && v_b > 0.0) {
        return Err(Error::NonPositive(format!("boundary values {v_a}, {v_b}")));
    }
    let mesh = Mesh1d::spanning(Geom1d::Radial(*m), s_a, s_b, h)?;
    let q = (m.dim() - 1.0) / (p - 1.0);
    let dens = |s: f64| math::exp(-q * m.ln_w(s));
    let mut g = vec![0.0; mesh.len()];
    for i in 1..mesh.len() {
        let (a, b) = (mesh.x(i - 1), mesh.x(i));
        let (v, _) = quad::gk15(&mut |s| dens(s), a, b);
        g[i] = g[i - 1] + v;
    }
    let total = g[mesh.len() - 1];
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Quadrature(format!("∫ w^(−q) over [{s_a}, {s_b}] = {total}")));
    }
    let bcoef = (v_b - v_a) / total;
    let values: Vec<f64> = g.iter().map(|gi| v_a + bcoef * gi).collect();
    // flux w^{n−1}|v′|^{p−2}v′ from the exact derivative v′ = B w^{−q}
    let flux = |s: f64| {
        let dv = bcoef * dens(s);
        m.area(s) * math::powf(math::abs(dv), p - 2.0) * dv
    };
    let mut residual: f64 = 0.0;
    if bcoef != 0.0 {
        for i in 1..mesh.len() - 1 {
            let s = mesh.x(i);
            let d = (flux(mesh.x(i + 1)) - flux(mesh.x(i - 1))) / (2.0 * mesh.h);
            residual = residual.max(math::abs(d / m.area(s)));
        }
    }
    let field = ScalarField::on_mesh(mesh, values, p)?;
    Ok(RadialSolution { field, b: bcoef, residual })
}

/// Where the radial profile is pinned beyond the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outer {
    /// v → 0 at infinity (needs ∫^∞ w^{−(n−1)/(p−1)} < ∞).
    Infinity,
    /// v = 0 at the given radius.
    Zero(f64),
}

/// The radial profile with v = 1 at s0, in log form.
///
/// Returns u = −(p−1) log v and |∇u| at each node of [s0, s1]. Computing
/// G(s) = ∫_s^{outer} (w(s)/w(σ))^{(n−1)/(p−1)} dσ keeps everything finite
/// even when v itself underflows; |∇u| = (p−1)/G.
#[derive(Debug, Clone)]
pub struct DecayingProfile {
    pub u: ScalarField,
    pub grad: Vec<f64>,
    /// v(s1), the value used as outer Dirichlet data on [s0, s1].
    pub v_outer: f64,
    /// Relative spread of the flux w^{n−1}|v′|^{p−1} across the nodes.
    pub flux_residual: f64,
}

pub fn radial_decaying(m: &WarpedMetric, p: f64, s0: f64, s1: f64, h: f64) -> Result<DecayingProfile> {
    radial_profile(m, p, s0, s1, h, Outer::Infinity)
}

pub fn radial_profile(m: &WarpedMetric, p: f64, s0: f64, s1: f64, h: f64, outer: Outer) -> Result<DecayingProfile> {
    if !(p > 1.0) {
        return Err(invalid(format!("p = {p} must exceed 1")));
    }
    let mesh = Mesh1d::spanning(Geom1d::Radial(*m), s0, s1, h)?;
    let q = (m.dim() - 1.0) / (p - 1.0);
    let n = mesh.len();
    let lw: Vec<f64> = (0..n).map(|i| m.ln_w(mesh.x(i))).collect();
    let s_end = mesh.x(n - 1);
    let lw_end = lw[n - 1];
    let ratio = |s: f64| math::exp(q * (lw_end - m.ln_w(s)));
    let mut g = vec![0.0; n];
    g[n - 1] = match outer {
        Outer::Infinity => match quad::integrate_to_infinity(ratio, s_end, 1e-12)? {
            Improper::Converged { value, .. } => value,
            Improper::Diverged { .. } => {
                return Err(Error::Quadrature(format!("p = {p}: ∫^∞ w^(−q) diverges; no decaying solution")))
            }
        },
        Outer::Zero(r) => {
            if !(r > s_end) {
                return Err(invalid(format!("zero radius {r} must lie beyond {s_end}")));
            }
            quad::integrate(ratio, s_end, r, quad::QuadOpts { rel_tol: 1e-13, ..Default::default() })?
        }
    };
    for i in (0..n - 1).rev() {
        let (a, b) = (mesh.x(i), mesh.x(i + 1));
        let (seg, _) = quad::gk15(&mut |s| math::exp(q * (lw[i] - m.ln_w(s))), a, b);
        g[i] = seg + math::exp(q * (lw[i] - lw[i + 1])) * g[i + 1];
    }
    let nm1 = m.dim() - 1.0;
    let u: Vec<f64> = (0..n)
        .map(|i| nm1 * (lw[i] - lw[0]) - (p - 1.0) * (math::ln(g[i]) - math::ln(g[0])))
        .collect();
    let grad: Vec<f64> = g.iter().map(|gi| (p - 1.0) / gi).collect();
    // w^{n−1} v^{p−1} G^{1−p} should not depend on s
    let log_flux: Vec<f64> = (0..n).map(|i| nm1 * lw[i] - u[i] - (p - 1.0) * math::ln(g[i])).collect();
    let flux_residual = log_flux.iter().map(|l| math::abs(math::expm1(l - log_flux[0]))).fold(0.0, f64::max);
    let v_outer = math::exp(-u[n - 1] / (p - 1.0));
    Ok(DecayingProfile { u: ScalarField::on_mesh(mesh, u, p)?, grad, v_outer, flux_residual })
}

/// u = −(p−1) log v.
pub fn log_transform(v: &ScalarField, p: f64) -> Result<ScalarField> {
    if let Some(x) = v.values.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::NonPositive(format!("log transform of v = {x}")));
    }
    let mut u = v.map(|x| -(p - 1.0) * math::ln(x));
    u.p = p;
    Ok(u)
}

/// v = exp(−u/(p−1)), the inverse of [`log_transform`].
pub fn exp_transform(u: &ScalarField, p: f64) -> ScalarField {
    u.map(|x| math::exp(-x / (p - 1.0)))
}

/// Planar domains for the grid solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain2d {
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Annulus { cx: f64, cy: f64, r_in: f64, r_out: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub delta0: f64,
    pub delta_final: f64,
    pub delta_factor: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { delta0: 1e-2, delta_final: 1e-10, delta_factor: 10.0, newton_tol: 1e-8, max_newton: 60 }
    }
}

/// Dirichlet problem for div(|∇v|^{p−2}∇v) = 0 on a planar domain.
pub struct DirichletProblem {
    pub domain: Domain2d,
    pub h: f64,
    pub p: f64,
    pub boundary: Box<dyn Fn(f64, f64) -> f64>,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageLog {
    pub delta: f64,
    pub newton_iterations: usize,
    pub residual: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct GridSolution {
    pub field: ScalarField,
    pub stages: Vec<StageLog>,
    /// Scaled residual at δ_final.
    pub residual: f64,
    /// How far interior values stray outside [min, max] of the boundary data.
    pub max_principle_violation: f64,
    /// Nodes that carry Dirichlet data.
    pub boundary_nodes: Vec<usize>,
}

// one P1 triangle: three node indices and the gradients of their hat functions (×h)
struct Tri {
    nodes: [usize; 3],
    grads: [(f64, f64); 3],
}

struct Assembly {
    tris: Vec<Tri>,
    active_index: Vec<Option<usize>>,
    n_active: usize,
    area: f64,
    h: f64,
}

impl Assembly {
    fn new(grid: &Grid2d) -> Assembly {
        let mut active_index = vec![None; grid.len()];
        let mut n_active = 0;
        for k in 0..grid.len() {
            if grid.active[k] {
                active_index[k] = Some(n_active);
                n_active += 1;
            }
        }
        let mut tris = Vec::new();
        for j in 0..grid.ny - 1 {
            for i in 0..grid.nx - 1 {
                let a = grid.idx(i, j);
                let b = grid.idx(i + 1, j);
                let c = grid.idx(i, j + 1);
                let d = grid.idx(i + 1, j + 1);
                let t1 = Tri { nodes: [a, b, c], grads: [(-1.0, -1.0), (1.0, 0.0), (0.0, 1.0)] };
                let t2 = Tri { nodes: [d, c, b], grads: [(1.0, 1.0), (-1.0, 0.0), (0.0, -1.0)] };
                for t in [t1, t2] {
                    if t.nodes.iter().any(|&k| grid.active[k]) {
                        tris.push(t);
                    }
                }
            }
        }
        Assembly { tris, active_index, n_active, area: 0.5 * grid.h * grid.h, h: grid.h }
    }

    fn tri_grad(&self, t: &Tri, v: &[f64]) -> (f64, f64) {
        let mut g = (0.0, 0.0);
        for k in 0..3 {
            g.0 += t.grads[k].0 * v[t.nodes[k]];
            g.1 += t.grads[k].1 * v[t.nodes[k]];
        }
        (g.0 / self.h, g.1 / self.h)
    }

    fn energy(&self, v: &[f64], p: f64, delta: f64) -> f64 {
        self.tris
            .iter()
            .map(|t| {
                let g = self.tri_grad(t, v);
                self.area * math::powf(g.0 * g.0 + g.1 * g.1 + delta, 0.5 * p) / p
            })
            .sum()
    }

    /// Residual on the unknowns and the flux scale max k|g|.
    fn residual(&self, v: &[f64], p: f64, delta: f64) -> (Vec<f64>, f64) {
        let mut r = vec![0.0; self.n_active];
        let mut scale: f64 = 0.0;
        for t in self.tris.iter() {
            let g = self.tri_grad(t, v);
            let s = g.0 * g.0 + g.1 * g.1 + delta;
            let k = math::powf(s, 0.5 * p - 1.0);
            scale = scale.max(k * math::sqrt(g.0 * g.0 + g.1 * g.1));
            for a in 0..3 {
                if let Some(ia) = self.active_index[t.nodes[a]] {
                    r[ia] += self.area * k * (t.grads[a].0 * g.0 + t.grads[a].1 * g.1) / self.h;
                }
            }
        }
        (r, scale)
    }

    fn hessian(&self, v: &[f64], p: f64, delta: f64) -> crate::linalg::Csr {
        let mut trip = Triplets::new(self.n_active);
        let linear = p == 2.0;
        for t in self.tris.iter() {
            let g = self.tri_grad(t, v);
            let s = g.0 * g.0 + g.1 * g.1 + delta;
            let (k, kp) = if linear {
                (1.0, 0.0)
            } else {
                (math::powf(s, 0.5 * p - 1.0), (p - 2.0) * math::powf(s, 0.5 * p - 2.0))
            };
            // D²F = k I + k′ g gᵀ
            let m = [[k + kp * g.0 * g.0, kp * g.0 * g.1], [kp * g.0 * g.1, k + kp * g.1 * g.1]];
            let c = self.area / (self.h * self.h);
            for a in 0..3 {
                let Some(ia) = self.active_index[t.nodes[a]] else { continue };
                let ga = t.grads[a];
                let mga = (m[0][0] * ga.0 + m[0][1] * ga.1, m[1][0] * ga.0 + m[1][1] * ga.1);
                for b in 0..3 {
                    let Some(ib) = self.active_index[t.nodes[b]] else { continue };
                    let gb = t.grads[b];
                    trip.add(ia, ib, c * (mga.0 * gb.0 + mga.1 * gb.1));
                }
            }
        }
        trip.build()
    }
}

fn build_grid(domain: Domain2d, h: f64) -> Result<Grid2d> {
    if !(h > 0.0) {
        return Err(invalid(format!("grid spacing {h}")));
    }
    match domain {
        Domain2d::Rectangle { x0, x1, y0, y1 } => {
            if !(x1 > x0 && y1 > y0) {
                return Err(Error::Degenerate("empty rectangle".into()));
            }
            let nx = math::round((x1 - x0) / h) as usize + 1;
            let ny = math::round((y1 - y0) / h) as usize + 1;
            if ((nx - 1) as f64 * h - (x1 - x0)).abs() > 1e-9 * (x1 - x0)
                || ((ny - 1) as f64 * h - (y1 - y0)).abs() > 1e-9 * (y1 - y0)
            {
                return Err(invalid("rectangle sides must be multiples of h"));
            }
            let mut active = vec![false; nx * ny];
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    active[j * nx + i] = true;
                }
            }
            Ok(Grid2d { x0, y0, h, nx, ny, active })
        }
        Domain2d::Annulus { cx, cy, r_in, r_out } => {
            if !(r_out > r_in && r_in > 0.0) {
                return Err(Error::Degenerate("annulus radii".into()));
            }
            let half = math::ceil(r_out / h) as usize + 1;
            let nx = 2 * half + 1;
            let x0 = cx - half as f64 * h;
            let y0 = cy - half as f64 * h;
            let mut active = vec![false; nx * nx];
            for j in 0..nx {
                for i in 0..nx {
                    let (x, y) = (x0 + i as f64 * h - cx, y0 + j as f64 * h - cy);
                    let r = math::sqrt(x * x + y * y);
                    active[j * nx + i] = r > r_in && r < r_out;
                }
            }
            Ok(Grid2d { x0, y0, h, nx, ny: nx, active })
        }
    }
}

/// Newton's method with δ-continuation and energy line search.
pub fn solve_p_laplace_grid(prob: &DirichletProblem) -> Result<GridSolution> {
    let p = prob.p;
    if !(p > 1.0) {
        return Err(invalid(format!("p = {p} must exceed 1")));
    }
    let grid = build_grid(prob.domain, prob.h)?;
    let asm = Assembly::new(&grid);
    // Dirichlet nodes that share a triangle with an unknown
    let rect = matches!(prob.domain, Domain2d::Rectangle { .. });
    let mut needed: Vec<bool> = grid.active.iter().map(|&a| rect && !a).collect();
    for t in asm.tris.iter() {
        for &k in t.nodes.iter() {
            if !grid.active[k] {
                needed[k] = true;
            }
        }
    }
    let mut v = vec![0.0; grid.len()];
    let mut bmin = f64::INFINITY;
    let mut bmax = f64::NEG_INFINITY;
    let mut boundary_nodes = Vec::new();
    for k in 0..grid.len() {
        if needed[k] {
            let (i, j) = (k % grid.nx, k / grid.nx);
            let (x, y) = grid.point(i, j);
            let g = (prob.boundary)(x, y);
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::NonPositive(format!("boundary value {g} at ({x}, {y})")));
            }
            v[k] = g;
            bmin = bmin.min(g);
            bmax = bmax.max(g);
            boundary_nodes.push(k);
        }
    }
    let fill = 0.5 * (bmin + bmax);
    for k in 0..grid.len() {
        if !needed[k] {
            v[k] = if grid.active[k] { fill } else { bmin };
        }
    }
    let cfg = prob.solver;
    // harmonic extension as the starting guess
    newton_stage(&asm, &mut v, 2.0, 0.0, &cfg, true)?;
    let mut stages = Vec::new();
    let mut residual;
    if p == 2.0 {
        let log = newton_stage(&asm, &mut v, 2.0, 0.0, &cfg, false)?;
        residual = log.residual;
        stages.push(log);
    } else {
        let mut delta = cfg.delta0;
        loop {
            let log = newton_stage(&asm, &mut v, p, delta, &cfg, false)?;
            residual = log.residual;
            stages.push(log);
            if delta <= cfg.delta_final * (1.0 + 1e-9) {
                break;
            }
            delta = (delta / cfg.delta_factor).max(cfg.delta_final);
        }
    }
    if let Some(x) = (0..grid.len()).filter(|&k| grid.active[k]).map(|k| v[k]).find(|&x| !(x > 0.0)) {
        return Err(Error::NonPositive(format!("iterate value {x}")));
    }
    let mut violation: f64 = 0.0;
    for k in 0..grid.len() {
        if grid.active[k] {
            violation = violation.max(v[k] - bmax).max(bmin - v[k]);
        }
    }
    let field = ScalarField::on_grid(grid, v, p)?;
    Ok(GridSolution { field, stages, residual, max_principle_violation: violation.max(0.0), boundary_nodes })
}

fn newton_stage(
    asm: &Assembly,
    v: &mut [f64],
    p: f64,
    delta: f64,
    cfg: &SolverConfig,
    single_step: bool,
) -> Result<StageLog> {
    let h2 = asm.h * asm.h;
    let mut iters = 0;
    loop {
        let (r, scale) = asm.residual(v, p, delta);
        let rmax = r.iter().fold(0.0f64, |a, &b| a.max(math::abs(b))) / h2;
        let energy = asm.energy(v, p, delta);
        if rmax <= cfg.newton_tol * scale.max(1.0) && !(single_step && iters == 0) {
            return Ok(StageLog { delta, newton_iterations: iters, residual: rmax, energy });
        }
        if single_step && iters == 1 {
            return Ok(StageLog { delta, newton_iterations: iters, residual: rmax, energy });
        }
        if iters >= cfg.max_newton {
            return Err(Error::NonConvergence(format!(
                "Newton at δ = {delta:e}: residual {rmax:e} after {iters} iterations"
            )));
        }
        let hess = asm.hessian(v, p, delta);
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let mut d = vec![0.0; asm.n_active];
        pcg(&hess, &rhs, &mut d, 1e-13, 20 * asm.n_active.max(100))?;
        let slope: f64 = r.iter().zip(&d).map(|(a, b)| a * b).sum();
        let active: Vec<usize> = (0..v.len()).filter(|&k| asm.active_index[k].is_some()).collect();
        let old: Vec<f64> = active.iter().map(|&k| v[k]).collect();
        // near convergence the energy drop falls below its rounding; use |R| as merit then
        let by_residual = math::abs(slope) <= 1e-11 * math::abs(energy);
        let r0 = r.iter().map(|x| x * x).sum::<f64>();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            for (n, &k) in active.iter().enumerate() {
                v[k] = old[n] + t * d[asm.active_index[k].unwrap()];
            }
            let positive = p == 2.0 || active.iter().all(|&k| v[k] > 0.0);
            let ok = positive
                && if by_residual {
                    let (rt, _) = asm.residual(v, p, delta);
                    rt.iter().map(|x| x * x).sum::<f64>() <= (1.0 - 1e-4 * t) * r0
                } else {
                    asm.energy(v, p, delta) <= energy + 1e-4 * t * slope
                };
            if ok {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            for (n, &k) in active.iter().enumerate() {
                v[k] = old[n];
            }
            let (r, _) = asm.residual(v, p, delta);
            let rmax = r.iter().fold(0.0f64, |a, &b| a.max(math::abs(b))) / h2;
            // no descent left: accept if we are at rounding level
            if rmax <= 1e3 * cfg.newton_tol * scale.max(1.0) {
                return Ok(StageLog { delta, newton_iterations: iters, residual: rmax, energy });
            }
            return Err(Error::NonConvergence(format!("line search failed at δ = {delta:e}")));
        }
        iters += 1;
    }
}

/// The constants b_{p,n}, c_{p,n} and C(n, K, p, R, ε) of the interior estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorConstants {
    pub b: f64,
    pub c: f64,
    pub big_c: f64,
    pub rhs: f64,
}

pub fn interior_constants(p: f64, n: f64, k: f64, r: f64, eps: f64) -> InteriorConstants {
    let b = 2.0 * (p - 1.0) / (n - 1.0) - 2.0;
    let mx = (p - 1.0).max(1.0);
    let c = math::neg_part(2.0 * (0.5 * p - 1.0) * (0.5 * p - 1.0) / (n - 1.0) + (p - 2.0) * p / 2.0)
        + (0.5 * p + 1.0) * mx;
    let one = 1.0 - eps;
    let big_c = (n - 1.0) * (n - 1.0) * k * k / one
        + 10.0 * (n + p - 2.0) * (n - 1.0) * (1.0 + k * r) / (one * r * r)
        + 5.0 * mx * (n - 1.0) / (one * r * r);
    let rhs = 5.0 * (n - 1.0) / (r * r * one) * (c + (n - 1.0) * b * b / (8.0 * eps)) + big_c;
    InteriorConstants { b, c, big_c, rhs }
}

/// sup_{B(x0,R/2)} |∇u|² against the interior bound.
pub fn interior_estimate_check(
    u: &ScalarField,
    p: f64,
    n: usize,
    k: f64,
    r: f64,
    eps: f64,
    x0: &[f64],
) -> Result<EstimateReport> {
    if !(eps > 0.0 && eps < 1.0) || !(r > 0.0) || !(k >= 0.0) {
        return Err(invalid(format!("ε = {eps}, R = {r}, K = {k}")));
    }
    let consts = interior_constants(p, n as f64, k, r, eps);
    let (lhs, worst) = match &u.layout {
        Layout::Mesh(mesh) => {
            let s0 = x0[0];
            if s0 - r < mesh.x0 - 1e-12 || s0 + r > mesh.x_end() + 1e-12 {
                return Err(Error::OutOfDomain(format!("B({s0}, {r}) leaves [{}, {}]", mesh.x0, mesh.x_end())));
            }
            let g = mesh.derivative(&u.values);
            let mut best = (0.0f64, s0);
            for i in 0..mesh.len() {
                let s = mesh.x(i);
                if math::abs(s - s0) <= 0.5 * r + 1e-12 && g[i] * g[i] > best.0 {
                    best = (g[i] * g[i], s);
                }
            }
            (best.0, vec![best.1])
        }
        Layout::Grid(grid) => {
            let (cx, cy) = (x0[0], x0[1]);
            for jj in 0..grid.ny {
                for ii in 0..grid.nx {
                    let (x, y) = grid.point(ii, jj);
                    let d = math::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy));
                    if d < r - 1.5 * grid.h && !grid.active[grid.idx(ii, jj)] {
                        return Err(Error::OutOfDomain(format!("B(({cx}, {cy}), {r}) leaves the domain")));
                    }
                }
            }
            let (xa, xb) = (grid.x0, grid.x0 + grid.h * (grid.nx - 1) as f64);
            let (ya, yb) = (grid.y0, grid.y0 + grid.h * (grid.ny - 1) as f64);
            if cx - r < xa - 1e-12 || cx + r > xb + 1e-12 || cy - r < ya - 1e-12 || cy + r > yb + 1e-12 {
                return Err(Error::OutOfDomain("ball leaves the grid".into()));
            }
            let mut best = (0.0f64, cx, cy);
            for jj in 0..grid.ny - 1 {
                for ii in 0..grid.nx - 1 {
                    let (x, y) = grid.cell_center(ii, jj);
                    if math::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy)) <= 0.5 * r {
                        let g = grid.cell_gradient(&u.values, ii, jj);
                        let f = g.0 * g.0 + g.1 * g.1;
                        if f > best.0 {
                            best = (f, x, y);
                        }
                    }
                }
            }
            (best.0, vec![best.1, best.2])
        }
    };
    Ok(EstimateReport::new("interior-gradient", lhs, consts.rhs, 1e-12 * consts.rhs, worst)
        .param("p", p)
        .param("n", n as f64)
        .param("K", k)
        .param("R", r)
        .param("eps", eps)
        .param("b", consts.b)
        .param("c", consts.c)
        .param("C", consts.big_c))
}

/// sup |∇u| of the decaying radial solution over the window [S/2, S] against (n−1)K.
///
/// The radial solution is singular at the pole, so the global bound is read
/// off far from it; the window is where balls of radius ~S/2 avoid the pole.
pub fn global_bound_check(m: &WarpedMetric, p: f64, s: f64) -> Result<EstimateReport> {
    let k = match m.name {
        MetricName::Hyperbolic(k) => k,
        _ => curvature_bounds(m, 0.0, s)?.k_sectional(),
    };
    if !(s > 0.0) {
        return Err(invalid(format!("truncation radius {s}")));
    }
    let prof = radial_decaying(m, p, 0.5 * s, s, 1e-2)?;
    let mesh = prof.u.mesh().unwrap();
    let (i, lhs) = prof
        .grad
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, &g)| if g > a.1 { (i, g) } else { a });
    let bound = (m.dim() - 1.0) * k;
    let ratio = if bound > 0.0 { lhs / bound } else { f64::INFINITY };
    Ok(EstimateReport::new("global-gradient", lhs, bound, 1e-6, vec![mesh.x(i)])
        .param("p", p)
        .param("n", m.dim())
        .param("K", k)
        .param("S", s)
        .param("sharpness", ratio))
}

/// Radial barrier φ(r) = 1 − α∫_R^r σ used for the boundary gradient bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barrier {
    pub n: f64,
    pub p: f64,
    pub r: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub bound: f64,
    /// (p−1)α ≤ bound
    pub holds: bool,
}

impl Barrier {
    pub fn sigma(&self, r: f64) -> f64 {
        let q = (self.n - 1.0) / (self.p - 1.0);
        math::powf(self.r * math::exp(-math::sqrt(self.kappa) * (r - self.r)) / r, q)
    }

    pub fn phi(&self, r: f64) -> f64 {
        let i = quad::integrate(|x| self.sigma(x), self.r, r, quad::QuadOpts::default()).unwrap_or(f64::NAN);
        1.0 - self.alpha * i
    }

    /// |φ′(R)|·(p−1), the boundary slope of u for the barrier.
    pub fn slope(&self) -> f64 {
        (self.p - 1.0) * self.alpha
    }

    /// (n−1)/R, the bound available when Ricci is nonnegative.
    pub fn sharpened_bound(&self) -> f64 {
        (self.n - 1.0) / self.r
    }
}

pub fn boundary_barrier(n: usize, p: f64, r: f64, kappa: f64) -> Result<Barrier> {
    let nf = n as f64;
    if !(p > 1.0) || p >= nf {
        return Err(invalid(format!("barrier needs 1 < p < n (p = {p}, n = {n})")));
    }
    if !(r > 0.0 && kappa >= 0.0) {
        return Err(invalid(format!("R = {r}, κ = {kappa}")));
    }
    let mut b = Barrier { n: nf, p, r, kappa, alpha: 0.0, bound: 0.0, holds: false };
    let integral = quad::integrate(|x| b.sigma(x), r, 2.0 * r, quad::QuadOpts { rel_tol: 1e-14, ..Default::default() })?;
    b.alpha = 1.0 / integral;
    let two_pow = math::powf(2.0, (nf - p) / (1.0 - p));
    b.bound = ((nf - 1.0) / r) * (1.0 + 2.0 * math::sqrt(kappa) * r) / (1.0 - two_pow);
    b.holds = b.slope() <= b.bound;
    Ok(b)
}

/// Geometry of a boundary sphere {s = s0} in a warped product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub s0: f64,
    /// Mean curvature with respect to the normal pointing into the domain's complement.
    pub mean_curvature: f64,
    pub h_plus: f64,
    pub ball_radius: f64,
    pub injectivity: f64,
    pub kappa: f64,
}

impl BoundaryData {
    /// Boundary of the exterior region {s ≥ s0}: the sphere {s = s0}.
    pub fn sphere(m: &WarpedMetric, s0: f64) -> Result<BoundaryData> {
        m.check_domain(s0)?;
        if !(s0 > 0.0) {
            return Err(invalid("boundary sphere needs s0 > 0"));
        }
        let h = m.mean_curvature(s0);
        let cb = curvature_bounds(m, s0, 2.0 * s0 + 1.0)?;
        Ok(BoundaryData {
            s0,
            mean_curvature: h,
            h_plus: h.max(0.0),
            ball_radius: s0,
            injectivity: f64::INFINITY,
            kappa: cb.kappa_ricci(m.n),
        })
    }
}

/// One-sided second-order normal derivative of u at the inner boundary node.
pub fn boundary_estimate_check(u: &ScalarField, bd: &BoundaryData, p: f64, eps: f64) -> Result<EstimateReport> {
    let mesh = u.mesh().ok_or_else(|| Error::Mismatch("boundary check expects a radial mesh".into()))?;
    if mesh.len() < 3 || (mesh.x0 - bd.s0).abs() > 1e-9 * bd.s0.max(1.0) {
        return Err(Error::Degenerate("boundary normal not resolvable on the mesh".into()));
    }
    let v = &u.values;
    let dn = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * mesh.h);
    let lhs = math::abs(dn);
    Ok(EstimateReport::new("boundary-gradient", lhs, bd.h_plus + eps, 0.0, vec![bd.s0])
        .param("p", p)
        .param("eps", eps)
        .param("H", bd.mean_curvature))
}

/// Per-p outcome of a boundary sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct P0Sweep {
    pub eps: f64,
    pub reports: Vec<EstimateReport>,
    /// Largest p of the sequence from which every smaller p passes.
    pub p0: Option<f64>,
}

/// Solve the sphere-complement problems v = 1 on {s = s0}, v = v_out on
/// {s = s_out} for each p of a decreasing sequence and locate p0(ε).
pub fn empirical_p0(
    m: &WarpedMetric,
    s0: f64,
    s_out: f64,
    v_out: f64,
    p_seq: &[f64],
    eps: f64,
    h: f64,
) -> Result<P0Sweep> {
    if p_seq.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("p sequence must be strictly decreasing"));
    }
    let bd = BoundaryData::sphere(m, s0)?;
    let mut reports = Vec::with_capacity(p_seq.len());
    for &p in p_seq {
        let sol = radial_p_harmonic(m, p, s0, s_out, 1.0, v_out, h)?;
        let u = log_transform(&sol.field, p)?;
        reports.push(boundary_estimate_check(&u, &bd, p, eps)?);
    }
    let mut p0 = None;
    for rep in reports.iter().rev() {
        if !rep.pass {
            break;
        }
        p0 = rep.get("p");
    }
    Ok(P0Sweep { eps, reports, p0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anisotropy_inverse_and_spectrum() {
        let a = AnisotropyTensor::new(&[0.3, -1.2, 0.5], 1.7).unwrap();
        assert!(a.inverse_defect() < 1e-14);
        assert_eq!(a.eigenvalues(), vec![0.7, 1.0, 1.0]);
        // |I|²_A = tr(A²) = (p−1)² + (n−1)
        let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert!((a.norm2(&id) - (0.49 + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn interior_constants_at_p2_n3() {
        let c = interior_constants(2.0, 3.0, 0.0, 1.0, 0.5);
        assert_eq!(c.b, -1.0);
        assert_eq!(c.c, 2.0);
    }
}
