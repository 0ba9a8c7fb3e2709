//! Explicit conservative finite-volume steppers on 1D meshes (the line or the
//! radial coordinate of a warped product) and the run driver.

use super::reg::RegFunctions;
use crate::error::{invalid, Error, Result};
use crate::field::{Geom1d as Geom, Mesh1d, ScalarField};
use crate::math;
use alloc::format;
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::fmt;

/// Condition at one end of the mesh.
#[derive(Clone)]
pub enum Bc {
    /// Zero flux.
    Neumann,
    /// Prescribed value as a function of time.
    Dirichlet(Rc<dyn Fn(f64) -> f64>),
}

impl Bc {
    pub fn fixed(value: f64) -> Bc {
        Bc::Dirichlet(Rc::new(move |_| value))
    }
}

impl fmt::Debug for Bc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bc::Neumann => write!(f, "Neumann"),
            Bc::Dirichlet(_) => write!(f, "Dirichlet"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Boundary {
    pub left: Bc,
    pub right: Bc,
}

impl Boundary {
    pub fn neumann() -> Boundary {
        Boundary { left: Bc::Neumann, right: Bc::Neumann }
    }
}

impl Default for Boundary {
    fn default() -> Self {
        Boundary::neumann()
    }
}

/// Which equation a run integrates; the stored field is v, φ or u accordingly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EquationKind {
    /// v_t = div(|∇v|^{p−2}∇v), with the gradient regularized by δ.
    A,
    /// The regularized pressure equation.
    APressure,
    /// u_t = div(|∇u|^{p−2}∇u) − |∇u|^p.
    B,
    /// u_t = div(f_ε^{p/2−1}∇u) − f_ε^{p/2}, f_ε = |∇u|² + ε.
    BReg,
}

impl EquationKind {
    pub fn tag(&self) -> &'static str {
        match self {
            EquationKind::A => "A",
            EquationKind::APressure => "A-pressure",
            EquationKind::B => "B",
            EquationKind::BReg => "B-reg",
        }
    }
}

pub(crate) fn mesh_of(f: &ScalarField) -> Result<&Mesh1d> {
    f.mesh().ok_or_else(|| invalid("parabolic steppers run on 1D meshes"))
}

#[inline]
pub(crate) fn face_grad(v: &[f64], i: usize, h: f64) -> f64 {
    (v[i + 1] - v[i]) / h
}

// (g² + δ)^{(p−2)/2}, exactly 1 at p = 2
#[inline]
pub(crate) fn diffusivity(g: f64, p: f64, delta: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else {
        math::powf(g * g + delta, 0.5 * (p - 2.0))
    }
}

// Face regularization of equation B. Below p = 2 the unregularized diffusivity
// blows up where neighbours coincide, so ε = 0 runs floor g² at h⁴.
#[inline]
pub(crate) fn b_face_delta(p: f64, eps: f64, h: f64) -> f64 {
    if eps == 0.0 && p < 2.0 {
        h * h * h * h
    } else {
        eps
    }
}

// the flux g ↦ k(g)g steepens by up to a factor p−1 along the gradient
#[inline]
fn stiffness(p: f64) -> f64 {
    (p - 1.0).max(1.0)
}

fn apply_bc(mesh: &Mesh1d, bc: &Boundary, t: f64, out: &mut [f64]) {
    let n = mesh.len();
    if let Bc::Dirichlet(f) = &bc.left {
        out[0] = f(t);
    }
    if let Bc::Dirichlet(f) = &bc.right {
        out[n - 1] = f(t);
    }
}

fn is_free(bc: &Boundary, i: usize, n: usize) -> bool {
    !(i == 0 && matches!(bc.left, Bc::Dirichlet(_)) || i == n - 1 && matches!(bc.right, Bc::Dirichlet(_)))
}

// explicit stability limit for a node-wise diffusion with face coefficients c_f
fn diffusion_limit(mesh: &Mesh1d, coef: &[f64], bc: &Boundary) -> f64 {
    let n = mesh.len();
    let mut lim = f64::INFINITY;
    for i in 0..n {
        if !is_free(bc, i, n) {
            continue;
        }
        let mut s = 0.0;
        if i > 0 {
            s += mesh.face(i - 1) * coef[i - 1];
        }
        if i + 1 < n {
            s += mesh.face(i) * coef[i];
        }
        if s > 0.0 {
            lim = lim.min(mesh.volume(i) * mesh.h / s);
        }
    }
    lim
}

/// Largest stable explicit step for equation A.
pub fn cfl_limit_a(mesh: &Mesh1d, v: &[f64], p: f64, delta: f64, bc: &Boundary) -> f64 {
    let c: Vec<f64> =
        (0..mesh.len() - 1).map(|i| stiffness(p) * diffusivity(face_grad(v, i, mesh.h), p, delta)).collect();
    diffusion_limit(mesh, &c, bc)
}

/// Largest stable explicit step for equation B (ε = 0) or its regularization.
pub fn cfl_limit_b(mesh: &Mesh1d, u: &[f64], p: f64, eps: f64, bc: &Boundary) -> f64 {
    let c: Vec<f64> =
        (0..mesh.len() - 1).map(|i| stiffness(p) * diffusivity(face_grad(u, i, mesh.h), p, b_face_delta(p, eps, mesh.h))).collect();
    diffusion_limit(mesh, &c, bc)
}

/// Largest stable explicit step for the regularized pressure equation.
pub fn cfl_limit_pressure(mesh: &Mesh1d, phi: &[f64], reg: &RegFunctions, bc: &Boundary) -> f64 {
    let n = mesh.len();
    let h = mesh.h;
    let c = ((reg.p - 2.0) / (reg.p - 1.0)).abs();
    let k: Vec<f64> = (0..n - 1).map(|i| stiffness(reg.p) * reg.phi(face_grad(phi, i, h).abs())).collect();
    let mut lim = f64::INFINITY;
    for i in 0..n {
        if !is_free(bc, i, n) {
            continue;
        }
        let mut diff = 0.0;
        let mut slope: f64 = 0.0;
        if i > 0 {
            diff += mesh.face(i - 1) * k[i - 1];
            slope = slope.max(reg.dpsi(face_grad(phi, i - 1, h).abs()));
        }
        if i + 1 < n {
            diff += mesh.face(i) * k[i];
            slope = slope.max(reg.dpsi(face_grad(phi, i, h).abs()));
        }
        let rate = c * phi[i].abs() * diff / (mesh.volume(i) * h) + slope / h;
        if rate > 0.0 {
            lim = lim.min(1.0 / rate);
        }
    }
    lim
}

fn check_dt(dt: f64, limit: f64) -> Result<()> {
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    Ok(())
}

fn kernel_a(mesh: &Mesh1d, v: &[f64], dt: f64, p: f64, delta: f64, out: &mut [f64]) {
    let n = mesh.len();
    let h = mesh.h;
    out.copy_from_slice(v);
    for i in 0..n - 1 {
        let g = face_grad(v, i, h);
        let flux = dt * mesh.face(i) * diffusivity(g, p, delta) * g;
        out[i] += flux / mesh.volume(i);
        out[i + 1] -= flux / mesh.volume(i + 1);
    }
}

/// One explicit conservative step of equation A. The field time advances by dt.
pub fn step_equation_a(v: &ScalarField, dt: f64, p: f64, delta: f64, bc: &Boundary) -> Result<ScalarField> {
    let mesh = mesh_of(v)?;
    if v.values.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::NonPositive("equation A needs v ≥ 0".into()));
    }
    check_dt(dt, cfl_limit_a(mesh, &v.values, p, delta, bc))?;
    let mut out = alloc::vec![0.0; v.values.len()];
    kernel_a(mesh, &v.values, dt, p, delta, &mut out);
    let t = v.t.unwrap_or(0.0) + dt;
    apply_bc(mesh, bc, t, &mut out);
    if out.iter().any(|&x| x < 0.0) {
        return Err(Error::NonPositive("v became negative".into()));
    }
    let mut f = v.with_values(out);
    f.t = Some(t);
    Ok(f)
}

// Godunov Hamiltonian for φ_t = G(|∇φ|) with G increasing
fn godunov(qm: f64, qp: f64, g: impl Fn(f64) -> f64) -> f64 {
    if qm <= qp {
        g(qm.abs().max(qp.abs()))
    } else if qp <= 0.0 && qm >= 0.0 {
        0.0
    } else {
        g(qm.abs().min(qp.abs()))
    }
}

fn kernel_pressure(mesh: &Mesh1d, phi: &[f64], dt: f64, reg: &RegFunctions, out: &mut [f64]) {
    let n = mesh.len();
    let h = mesh.h;
    let c = (reg.p - 2.0) / (reg.p - 1.0);
    let mut div = alloc::vec![0.0; n];
    for i in 0..n - 1 {
        let g = face_grad(phi, i, h);
        let flux = mesh.face(i) * reg.phi(g.abs()) * g;
        div[i] += flux / mesh.volume(i);
        div[i + 1] -= flux / mesh.volume(i + 1);
    }
    for i in 0..n {
        let qm = if i > 0 { face_grad(phi, i - 1, h) } else { 0.0 };
        let qp = if i + 1 < n { face_grad(phi, i, h) } else { 0.0 };
        let ham = godunov(qm, qp, |r| reg.psi(r));
        out[i] = phi[i] + dt * (c * phi[i] * div[i] + ham);
    }
}

/// One step of the regularized pressure equation.
pub fn step_pressure_a(phi: &ScalarField, dt: f64, reg: &RegFunctions, bc: &Boundary) -> Result<ScalarField> {
    let mesh = mesh_of(phi)?;
    if reg.p == 2.0 {
        return Err(invalid("the pressure variable is undefined at p = 2"));
    }
    if phi.p != reg.p {
        return Err(Error::Mismatch(format!("field has p = {}, regularization p = {}", phi.p, reg.p)));
    }
    check_dt(dt, cfl_limit_pressure(mesh, &phi.values, reg, bc))?;
    let mut out = alloc::vec![0.0; phi.values.len()];
    kernel_pressure(mesh, &phi.values, dt, reg, &mut out);
    let t = phi.t.unwrap_or(0.0) + dt;
    apply_bc(mesh, bc, t, &mut out);
    let mut f = phi.with_values(out);
    f.t = Some(t);
    Ok(f)
}

// Update of m = e^{−u}: m_t = div(k∇m) + εkm, carried out as m_new = m(1 + r)
// so nothing underflows in the tails.
fn kernel_b(mesh: &Mesh1d, u: &[f64], dt: f64, p: f64, eps: f64, out: &mut [f64]) {
    let n = mesh.len();
    let h = mesh.h;
    let mut r = alloc::vec![0.0; n];
    let mut kf = alloc::vec![0.0; n - 1];
    for i in 0..n - 1 {
        let k = diffusivity(face_grad(u, i, h), p, b_face_delta(p, eps, h));
        kf[i] = k;
        let w = dt * mesh.face(i) * k / h;
        r[i] += w * math::expm1(u[i] - u[i + 1]) / mesh.volume(i);
        r[i + 1] += w * math::expm1(u[i + 1] - u[i]) / mesh.volume(i + 1);
    }
    let mut src = alloc::vec![0.0; n];
    if eps > 0.0 {
        for i in 0..n {
            let g = if i == 0 {
                face_grad(u, 0, h)
            } else if i == n - 1 {
                face_grad(u, n - 2, h)
            } else {
                0.5 * (face_grad(u, i - 1, h) + face_grad(u, i, h))
            };
            src[i] = dt * eps * diffusivity(g, p, eps);
        }
    }
    for i in 0..n {
        // the source εkm is integrated exactly, so it shifts u linearly
        out[i] = u[i] - math::ln1p(r[i]) - src[i];
    }
}

/// One step of equation B (ε = 0) or its regularization (ε > 0).
pub fn step_equation_b(u: &ScalarField, dt: f64, p: f64, eps: f64, bc: &Boundary) -> Result<ScalarField> {
    let mesh = mesh_of(u)?;
    if !(p > 1.0 || p == 1.0 && eps > 0.0) {
        return Err(invalid(format!("equation B needs p > 1, or p = 1 with ε > 0 (got p = {p}, ε = {eps})")));
    }
    check_dt(dt, cfl_limit_b(mesh, &u.values, p, eps, bc))?;
    let mut out = alloc::vec![0.0; u.values.len()];
    kernel_b(mesh, &u.values, dt, p, eps, &mut out);
    let t = u.t.unwrap_or(0.0) + dt;
    apply_bc(mesh, bc, t, &mut out);
    let mut f = u.with_values(out);
    f.t = Some(t);
    Ok(f)
}

/// Settings of a run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kind: EquationKind,
    pub p: f64,
    /// δ for kind A, ε for A-pressure and B-reg; ignored for B.
    pub eps: f64,
    pub t0: f64,
    /// Snapshot times, strictly increasing and > t0. The last one ends the run.
    pub samples: Vec<f64>,
    /// Fraction of the stability limit used per step. 0.8 gives dt = 0.4h²/k on uniform meshes.
    pub safety: f64,
    /// Fixed step instead of the adaptive one.
    pub dt: Option<f64>,
    pub boundary: Boundary,
    pub max_steps: usize,
}

impl RunConfig {
    pub fn new(kind: EquationKind, p: f64, eps: f64, t0: f64, samples: Vec<f64>) -> RunConfig {
        RunConfig {
            kind,
            p,
            eps,
            t0,
            samples,
            safety: 0.8,
            dt: None,
            boundary: Boundary::neumann(),
            max_steps: 50_000_000,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> RunConfig {
        self.boundary = boundary;
        self
    }

    /// Snapshot times t0·ρ^k, k = 1..=count, with ρ chosen to reach t1.
    pub fn geometric_samples(t0: f64, t1: f64, count: usize) -> Vec<f64> {
        let rho = math::powf(t1 / t0, 1.0 / count as f64);
        let mut v: Vec<f64> = (1..=count).map(|k| t0 * math::powf(rho, k as f64)).collect();
        if let Some(last) = v.last_mut() {
            *last = t1;
        }
        v
    }

    pub fn uniform_samples(t0: f64, t1: f64, count: usize) -> Vec<f64> {
        (1..=count).map(|k| t0 + (t1 - t0) * k as f64 / count as f64).collect()
    }
}

/// Field values at a sample time together with the state one accepted step earlier.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Snapshot {
    pub t: f64,
    pub values: Vec<f64>,
    /// Values before the last step (empty for the initial snapshot).
    pub prev: Vec<f64>,
    /// Length of the last step (0 for the initial snapshot).
    pub dt: f64,
}

impl Snapshot {
    /// Backward difference over the last accepted step.
    pub fn time_derivative(&self) -> Option<Vec<f64>> {
        if self.prev.is_empty() || self.dt <= 0.0 {
            return None;
        }
        Some(self.values.iter().zip(&self.prev).map(|(a, b)| (a - b) / self.dt).collect())
    }
}

/// Steps taken between consecutive snapshots.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepLog {
    pub t: f64,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Largest dt/limit used.
    pub cfl_ratio: f64,
}

/// A finished run: snapshots at the requested times and its step log.
#[derive(Debug, Clone)]
pub struct ParabolicRun {
    pub kind: EquationKind,
    pub p: f64,
    pub eps: f64,
    pub mesh: Mesh1d,
    pub reg: Option<RegFunctions>,
    pub t0: f64,
    pub snapshots: Vec<Snapshot>,
    pub log: Vec<StepLog>,
}

impl ParabolicRun {
    pub fn field(&self, k: usize) -> ScalarField {
        let mut f = ScalarField::on_mesh(self.mesh.clone(), self.snapshots[k].values.clone(), self.p)
            .expect("snapshot matches mesh");
        f.t = Some(self.snapshots[k].t);
        f
    }

    /// Σ vol_i e^{−u_i}, the quantity the B stepper conserves exactly.
    pub fn discrete_mass(&self, k: usize) -> Option<f64> {
        if !matches!(self.kind, EquationKind::B | EquationKind::BReg) {
            return None;
        }
        let v = &self.snapshots[k].values;
        Some((0..v.len()).map(|i| self.mesh.volume(i) * math::exp(-v[i])).sum())
    }

    /// Largest backward-difference time derivative over all snapshots after the first.
    pub fn max_time_derivative(&self) -> f64 {
        self.snapshots
            .iter()
            .filter_map(|s| s.time_derivative())
            .flat_map(|d| d.into_iter())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A single-field explicit integrator; [`run_parabolic`] drives it between snapshots.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub kind: EquationKind,
    pub p: f64,
    pub eps: f64,
    pub mesh: Mesh1d,
    pub reg: Option<RegFunctions>,
    pub boundary: Boundary,
    pub t: f64,
    pub values: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    pub fn new(init: &ScalarField, kind: EquationKind, p: f64, eps: f64, t0: f64, boundary: Boundary) -> Result<Stepper> {
        let mesh = mesh_of(init)?.clone();
        match kind {
            EquationKind::A if !(p > 1.0) => return Err(invalid(format!("equation A needs p > 1 (got {p})"))),
            EquationKind::A if init.values.iter().any(|&v| v < 0.0) => {
                return Err(Error::NonPositive("equation A needs v ≥ 0".into()))
            }
            EquationKind::B if !(p > 1.0) => return Err(invalid(format!("equation B needs p > 1 (got {p})"))),
            EquationKind::BReg if !(p >= 1.0 && eps > 0.0) => {
                return Err(invalid(format!("B-reg needs p ≥ 1 and ε > 0 (got p = {p}, ε = {eps})")))
            }
            _ => {}
        }
        if !(eps >= 0.0) {
            return Err(invalid(format!("regularization must be ≥ 0 (got {eps})")));
        }
        let reg = if kind == EquationKind::APressure {
            if p == 2.0 {
                return Err(invalid("the pressure variable is undefined at p = 2"));
            }
            Some(super::reg::reg_functions(p, eps)?)
        } else {
            None
        };
        if let Geom::Radial(m) = mesh.geom {
            if m.s_min() == mesh.x0 && !matches!(boundary.left, Bc::Neumann) {
                return Err(invalid("the pole of a radial mesh must carry the Neumann condition"));
            }
        }
        let eps = if kind == EquationKind::B { 0.0 } else { eps };
        let n = init.values.len();
        Ok(Stepper { kind, p, eps, mesh, reg, boundary, t: t0, values: init.values.clone(), scratch: alloc::vec![0.0; n] })
    }

    pub fn stable_dt(&self) -> f64 {
        let (m, v, bc) = (&self.mesh, &self.values, &self.boundary);
        match self.kind {
            EquationKind::A => cfl_limit_a(m, v, self.p, self.eps, bc),
            EquationKind::APressure => cfl_limit_pressure(m, v, self.reg.as_ref().unwrap(), bc),
            EquationKind::B | EquationKind::BReg => cfl_limit_b(m, v, self.p, self.eps, bc),
        }
    }

    /// Advances by dt without a stability check.
    pub fn advance(&mut self, dt: f64) {
        let (m, v) = (&self.mesh, &self.values);
        match self.kind {
            EquationKind::A => kernel_a(m, v, dt, self.p, self.eps, &mut self.scratch),
            EquationKind::APressure => kernel_pressure(m, v, dt, self.reg.as_ref().unwrap(), &mut self.scratch),
            EquationKind::B | EquationKind::BReg => kernel_b(m, v, dt, self.p, self.eps, &mut self.scratch),
        }
        self.t += dt;
        apply_bc(&self.mesh, &self.boundary, self.t, &mut self.scratch);
        core::mem::swap(&mut self.values, &mut self.scratch);
    }
}

/// Integrates from `init` (at cfg.t0) through every sample time.
pub fn run_parabolic(init: &ScalarField, cfg: &RunConfig) -> Result<ParabolicRun> {
    if cfg.samples.is_empty() || cfg.samples[0] <= cfg.t0 || cfg.samples.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("sample times must be strictly increasing and after t0"));
    }
    if !(cfg.safety > 0.0 && cfg.safety <= 1.0) {
        return Err(invalid(format!("safety factor {} must lie in (0, 1]", cfg.safety)));
    }
    let mut st = Stepper::new(init, cfg.kind, cfg.p, cfg.eps, cfg.t0, cfg.boundary.clone())?;
    apply_bc(&st.mesh, &st.boundary, cfg.t0, &mut st.values);
    let mut snapshots = alloc::vec![Snapshot { t: cfg.t0, values: st.values.clone(), prev: Vec::new(), dt: 0.0 }];
    let mut log = Vec::new();
    let mut total = 0usize;
    for &ts in &cfg.samples {
        let mut entry = StepLog { t: ts, steps: 0, dt_min: f64::INFINITY, dt_max: 0.0, cfl_ratio: 0.0 };
        let mut prev = st.values.clone();
        let mut last_dt = 0.0;
        while st.t < ts * (1.0 - 1e-15) {
            let limit = st.stable_dt();
            let mut dt = match cfg.dt {
                Some(d) => d,
                None => cfg.safety * limit,
            };
            if dt > limit * (1.0 + 1e-12) {
                return Err(Error::Cfl { dt, limit });
            }
            if st.t + dt > ts {
                dt = ts - st.t;
            } else if cfg.dt.is_none() && st.t + 1.5 * dt > ts {
                // split the remainder so the last step before a snapshot is not tiny
                dt = 0.5 * (ts - st.t);
            }
            prev.copy_from_slice(&st.values);
            st.advance(dt);
            if st.kind == EquationKind::A && st.values.iter().any(|&x| x < 0.0) {
                return Err(Error::NonPositive(format!("v became negative at t = {}", st.t)));
            }
            if st.values.iter().any(|x| x.is_nan()) {
                return Err(Error::NonConvergence(format!("non-finite values at t = {}", st.t)));
            }
            entry.steps += 1;
            entry.dt_min = entry.dt_min.min(dt);
            entry.dt_max = entry.dt_max.max(dt);
            entry.cfl_ratio = entry.cfl_ratio.max(dt / limit);
            last_dt = dt;
            total += 1;
            if total > cfg.max_steps {
                return Err(Error::NonConvergence(format!("step budget {} exhausted at t = {}", cfg.max_steps, st.t)));
            }
        }
        st.t = ts;
        snapshots.push(Snapshot { t: ts, values: st.values.clone(), prev, dt: last_dt });
        log.push(entry);
    }
    Ok(ParabolicRun {
        kind: cfg.kind,
        p: cfg.p,
        eps: st.eps,
        mesh: st.mesh,
        reg: st.reg,
        t0: cfg.t0,
        snapshots,
        log,
    })
}
