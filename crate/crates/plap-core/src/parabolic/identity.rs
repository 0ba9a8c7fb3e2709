//! Residuals of the Bochner-type identities, evaluated with exact jets or with
//! nested fourth-order finite differences. Flat metrics only, so Ric = 0.

use super::exact::{barenblatt_calc, fundamental_u_calc, ln_normalization};
use crate::calc::{div, dot, grad, Calc, FdField};
use crate::error::{invalid, Error, Result};
use crate::jet::{Jet, JetSpace};
use crate::math;
use alloc::format;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum IdentityKind {
    /// 𝓛(f) for arbitrary u.
    BochnerElliptic,
    /// (∂t − L̂)h for solutions of equation A.
    Bochner2,
    /// (∂t − 𝓛)u_t and (∂t − 𝓛)f for solutions of equation B.
    Bochner3,
    /// (L̂ − ∂t)F_α for solutions of equation A.
    MainEvol,
    /// (∂t − 𝓛)F_α for solutions of equation B.
    BochnerKey,
    /// (∂t − 𝓛)V for V = 2 div(f^{p/2−1}∇u) − f^{p/2}.
    PtwiseV,
    /// (∂t − 𝓛)W for the pointwise entropy density.
    PtwiseW,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 7] = [
        IdentityKind::BochnerElliptic,
        IdentityKind::Bochner2,
        IdentityKind::Bochner3,
        IdentityKind::MainEvol,
        IdentityKind::BochnerKey,
        IdentityKind::PtwiseV,
        IdentityKind::PtwiseW,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            IdentityKind::BochnerElliptic => "bochner-elliptic",
            IdentityKind::Bochner2 => "bochner2",
            IdentityKind::Bochner3 => "bochner3",
            IdentityKind::MainEvol => "mainevol",
            IdentityKind::BochnerKey => "bochner-key",
            IdentityKind::PtwiseV => "ptwise-V",
            IdentityKind::PtwiseW => "ptwise-W",
        }
    }

    pub fn parse(s: &str) -> Result<IdentityKind> {
        IdentityKind::ALL.iter().copied().find(|k| k.tag() == s).ok_or_else(|| Error::UnknownName(s.into()))
    }

    /// Identities about solutions of equation A (v variables).
    pub fn is_a_family(&self) -> bool {
        matches!(self, IdentityKind::Bochner2 | IdentityKind::MainEvol)
    }
}

/// Test data. Static fields depend on x only; `Evolved` turns one into a
/// solution to second order in time at each sample point.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TestData {
    /// sin x₀ cos x₁ + 2x₀ + 3 (plus 0.3 sin x_k for k ≥ 2); sin x₀ + 2x₀ + 3 in 1D.
    Trig,
    /// x₀² − x₁².
    Saddle,
    /// The Barenblatt profile H_p (a v field).
    Barenblatt,
    /// u = −(p−1) ln v₀, or v₀ itself for the v identities at p = 2.
    FundamentalB,
    /// u(x, t₀ + τ) = u₀ + τΛ(u₀) + τ²/2 · 𝓛_{u₀}Λ(u₀), with Λ the operator of
    /// the identity's equation and 𝓛 its linearization.
    Evolved(StaticData),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StaticData {
    Trig,
    Saddle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdentitySetup {
    pub kind: IdentityKind,
    pub data: TestData,
    pub p: f64,
    pub n: usize,
    /// Regularization f_ε = |∇u|² + ε (B identities other than ptwise-W).
    pub eps: f64,
    /// α in F_α.
    pub alpha: f64,
}

impl IdentitySetup {
    pub fn new(kind: IdentityKind, data: TestData, p: f64, n: usize) -> IdentitySetup {
        IdentitySetup { kind, data, p, n, eps: 0.0, alpha: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    Jet,
    /// Nested central fourth-order differences with step h.
    FiniteDifference(f64),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdentityResult {
    pub kind: IdentityKind,
    pub max_residual: f64,
    /// Largest |side| seen, for scale.
    pub max_magnitude: f64,
    pub worst_point: Vec<f64>,
    pub points: usize,
}

fn static_field<F: Calc>(d: StaticData, xs: &[F]) -> F {
    match d {
        StaticData::Trig => {
            if xs.len() == 1 {
                return xs[0].sin() + xs[0].clone() * 2.0 + 3.0;
            }
            let mut s = xs[0].sin() * xs[1].cos() + xs[0].clone() * 2.0 + 3.0;
            for x in &xs[2..] {
                s = s + x.sin() * 0.3;
            }
            s
        }
        StaticData::Saddle => {
            if xs.len() < 2 {
                return xs[0].clone() * xs[0].clone();
            }
            xs[0].clone() * xs[0].clone() - xs[1].clone() * xs[1].clone()
        }
    }
}

// f = |∇u|² + ε
fn grad_sq<F: Calc>(g: &[F], eps: f64) -> F {
    dot(g, g) + eps
}

/// Λ_ε(u) = div(f^{p/2−1}∇u) − f^{p/2}.
pub fn lambda_b<F: Calc>(u: &F, p: f64, eps: f64, n: usize) -> F {
    let g = grad(u, n);
    let f = grad_sq(&g, eps);
    let k = f.powf(0.5 * p - 1.0);
    let flux: Vec<F> = g.iter().map(|gi| gi.clone() * k.clone()).collect();
    div(&flux) - f.powf(0.5 * p)
}

/// Δ_p v = div(|∇v|^{p−2}∇v).
pub fn plap<F: Calc>(v: &F, p: f64, n: usize) -> F {
    let g = grad(v, n);
    let k = grad_sq(&g, 0.0).powf(0.5 * p - 1.0);
    let flux: Vec<F> = g.iter().map(|gi| gi.clone() * k.clone()).collect();
    div(&flux)
}

// div(f^{p/2−1} A ∇w), A = id + (p−2)∇u⊗∇u/f
fn aniso_div<F: Calc>(g: &[F], f: &F, w: &F, p: f64, n: usize) -> F {
    let gw = grad(w, n);
    let ip = dot(g, &gw);
    let k = f.powf(0.5 * p - 1.0);
    let c = ip / f.clone() * (p - 2.0);
    let flux: Vec<F> = (0..n).map(|i| (gw[i].clone() + g[i].clone() * c.clone()) * k.clone()).collect();
    div(&flux)
}

/// 𝓛_ε(w), the linearization of Λ_ε at u.
pub fn lin_b<F: Calc>(u: &F, w: &F, p: f64, eps: f64, n: usize) -> F {
    let g = grad(u, n);
    let f = grad_sq(&g, eps);
    let gw = grad(w, n);
    aniso_div(&g, &f, w, p, n) - f.powf(0.5 * p - 1.0) * dot(&g, &gw) * p
}

/// L̂(w), the linearization of Δ_p at v.
pub fn lin_a<F: Calc>(v: &F, w: &F, p: f64, n: usize) -> F {
    let g = grad(v, n);
    let f = grad_sq(&g, 0.0);
    aniso_div(&g, &f, w, p, n)
}

fn hessian<F: Calc>(u: &F, n: usize) -> Vec<Vec<F>> {
    let g = grad(u, n);
    g.iter().map(|gi| (0..n).map(|j| gi.d(j)).collect()).collect()
}

fn frob<F: Calc>(t: &[Vec<F>]) -> F {
    let mut s = t[0][0].clone() * t[0][0].clone();
    for (i, row) in t.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if i + j > 0 {
                s = s + x.clone() * x.clone();
            }
        }
    }
    s
}

/// |T|²_A = A^{ik}A^{jl}T_ij T_kl with A = id + (p−2)∇u⊗∇u/f.
pub fn a_norm2<F: Calc>(t: &[Vec<F>], g: &[F], f: &F, p: f64) -> F {
    let n = g.len();
    let a = |i: usize, j: usize| -> F {
        let base = g[i].clone() * g[j].clone() / f.clone() * (p - 2.0);
        if i == j {
            base + 1.0
        } else {
            base
        }
    };
    let amat: Vec<Vec<F>> = (0..n).map(|i| (0..n).map(|j| a(i, j)).collect()).collect();
    // B = A T A
    let mut s: Option<F> = None;
    for i in 0..n {
        for j in 0..n {
            let mut b: Option<F> = None;
            for k in 0..n {
                for l in 0..n {
                    let term = amat[i][k].clone() * t[k][l].clone() * amat[l][j].clone();
                    b = Some(match b {
                        None => term,
                        Some(x) => x + term,
                    });
                }
            }
            let term = b.unwrap() * t[i][j].clone();
            s = Some(match s {
                None => term,
                Some(x) => x + term,
            });
        }
    }
    s.unwrap()
}

fn check_setup(s: &IdentitySetup) -> Result<()> {
    if s.n == 0 || s.n > 3 {
        return Err(invalid(format!("identities are evaluated for n ∈ 1..=3 (got {})", s.n)));
    }
    if !(s.p > 1.0) {
        return Err(invalid(format!("identities need p > 1 (got {})", s.p)));
    }
    if s.eps < 0.0 {
        return Err(invalid("ε must be ≥ 0"));
    }
    let a = s.kind.is_a_family();
    match s.data {
        TestData::Barenblatt if !a && s.kind != IdentityKind::BochnerElliptic => {
            return Err(invalid("Barenblatt data solve equation A; pick an A identity"))
        }
        TestData::FundamentalB if a && s.p != 2.0 => {
            return Err(invalid("v₀ solves equation A only at p = 2"))
        }
        TestData::FundamentalB if !a && s.eps != 0.0 => {
            return Err(invalid("v₀ is an exact solution only for ε = 0"))
        }
        TestData::Trig | TestData::Saddle if s.kind != IdentityKind::BochnerElliptic => {
            return Err(invalid(format!("{} holds only along solutions; use exact or evolved data", s.kind.tag())))
        }
        _ => {}
    }
    if (a || s.kind == IdentityKind::PtwiseW) && s.eps != 0.0 {
        return Err(invalid(format!("{} is evaluated at ε = 0", s.kind.tag())));
    }
    if matches!(s.kind, IdentityKind::MainEvol | IdentityKind::BochnerKey) && !(s.alpha > 0.0) {
        return Err(invalid("α must be positive"));
    }
    Ok(())
}

// The field the identity acts on: v for the A family, u otherwise.
fn build_field<F: Calc>(s: &IdentitySetup, xs: &[F], t: &F, t_base: f64) -> Result<F> {
    let n = s.n;
    Ok(match s.data {
        TestData::Trig => static_field(StaticData::Trig, xs) + (t.clone() * 0.0),
        TestData::Saddle => static_field(StaticData::Saddle, xs) + (t.clone() * 0.0),
        TestData::Barenblatt => barenblatt_calc(xs, t, s.p, n)?,
        TestData::FundamentalB => {
            let u = fundamental_u_calc(xs, t, s.p, &alloc::vec![0.0; n])?;
            if s.kind.is_a_family() {
                (-u).exp()
            } else {
                u
            }
        }
        TestData::Evolved(d) => {
            let u0 = static_field(d, xs);
            let tau = t.clone() - t_base;
            let (op, lin) = if s.kind.is_a_family() {
                let op = plap(&u0, s.p, n);
                let lin = lin_a(&u0, &op, s.p, n);
                (op, lin)
            } else {
                let op = lambda_b(&u0, s.p, s.eps, n);
                let lin = lin_b(&u0, &op, s.p, s.eps, n);
                (op, lin)
            };
            u0 + tau.clone() * op + tau.clone() * tau * lin * 0.5
        }
    })
}

// (lhs, rhs) pairs whose differences must vanish
fn sides<F: Calc>(s: &IdentitySetup, u: &F, t: &F) -> Vec<(F, F)> {
    let n = s.n;
    let p = s.p;
    let g = grad(u, n);
    match s.kind {
        IdentityKind::BochnerElliptic => {
            let f = grad_sq(&g, s.eps);
            let hess = hessian(u, n);
            let gf = grad(&f, n);
            let lam = lambda_b(u, p, s.eps, n);
            let lhs = lin_b(u, &f, p, s.eps, n);
            let rhs = f.powf(0.5 * p - 1.0) * frob(&hess) * 2.0
                + dot(&g, &grad(&lam, n)) * 2.0
                + dot(&gf, &gf) * f.powf(0.5 * p - 2.0) * (0.5 * p - 1.0);
            alloc::vec![(lhs, rhs)]
        }
        IdentityKind::Bochner2 => {
            let h = grad_sq(&g, 0.0);
            let hess = hessian(u, n);
            let gh = grad(&h, n);
            let lhs = h.d(n) - lin_a(u, &h, p, n);
            let rhs = -(h.powf(0.5 * p - 1.0) * frob(&hess) * 2.0)
                - dot(&gh, &gh) * h.powf(0.5 * p - 2.0) * (0.5 * p - 1.0);
            alloc::vec![(lhs, rhs)]
        }
        IdentityKind::Bochner3 => {
            let f = grad_sq(&g, s.eps);
            let hess = hessian(u, n);
            let gf = grad(&f, n);
            let ut = u.d(n);
            let first = (ut.d(n) - lin_b(u, &ut, p, s.eps, n), ut.konst(0.0));
            let lhs = f.d(n) - lin_b(u, &f, p, s.eps, n);
            let rhs = -(f.powf(0.5 * p - 1.0) * frob(&hess) * 2.0)
                - dot(&gf, &gf) * f.powf(0.5 * p - 2.0) * (0.5 * p - 1.0);
            alloc::vec![first, (lhs, rhs)]
        }
        IdentityKind::MainEvol => {
            let v = u;
            let h = grad_sq(&g, 0.0);
            let vt = v.d(n);
            let hp = h.powf(0.5 * p);
            let v2 = v.clone() * v.clone();
            let fa = hp.clone() / v2.clone() - vt.clone() / v.clone() * s.alpha;
            let f1 = hp / v2.clone() - vt.clone() / v.clone();
            let hess = hessian(v, n);
            let t_ij: Vec<Vec<F>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| hess[i][j].clone() / v.clone() - g[i].clone() * g[j].clone() / v2.clone() * (1.0 / (p - 1.0)))
                        .collect()
                })
                .collect();
            let lhs = lin_a(v, &fa, p, n) - fa.d(n);
            let rhs = h.powf(p - 2.0) * a_norm2(&t_ij, &g, &h, p) * p
                + vt.clone() * vt / v2 * ((s.alpha - 1.0) * (p - 2.0))
                + f1.clone() * f1 * (p - 2.0)
                - h.powf(0.5 * p - 1.0) / v.clone() * dot(&grad(&fa, n), &g) * (2.0 * (p - 1.0));
            alloc::vec![(lhs, rhs)]
        }
        IdentityKind::BochnerKey | IdentityKind::PtwiseV => {
            let f = grad_sq(&g, s.eps);
            let hess = hessian(u, n);
            let q = if s.kind == IdentityKind::BochnerKey {
                f.powf(0.5 * p) + u.d(n) * s.alpha
            } else {
                let k = f.powf(0.5 * p - 1.0);
                let flux: Vec<F> = g.iter().map(|gi| gi.clone() * k.clone()).collect();
                div(&flux) * 2.0 - f.powf(0.5 * p)
            };
            let lhs = q.d(n) - lin_b(u, &q, p, s.eps, n);
            let rhs = -(f.powf(p - 2.0) * a_norm2(&hess, &g, &f, p) * p);
            alloc::vec![(lhs, rhs)]
        }
        IdentityKind::PtwiseW => {
            let f = grad_sq(&g, 0.0);
            let nf = n as f64;
            let k = f.powf(0.5 * p - 1.0);
            let flux: Vec<F> = g.iter().map(|gi| gi.clone() * k.clone()).collect();
            let dp = div(&flux);
            let phi = u.clone() + ln_normalization(p, n) - t.ln() * (nf / p);
            let w = t.clone() * (dp.clone() * 2.0 - f.powf(0.5 * p)) + phi - nf;
            let hess = hessian(u, n);
            let tp = t.clone() * p;
            let c = (p - 2.0) / (p - 1.0);
            let t_ij: Vec<Vec<F>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let a_ij = g[i].clone() * g[j].clone() / f.clone() * (-c) + if i == j { 1.0 } else { 0.0 };
                            k.clone() * hess[i][j].clone() - a_ij / tp.clone()
                        })
                        .collect()
                })
                .collect();
            let lhs = w.d(n) - lin_b(u, &w, p, 0.0, n);
            let rhs = -(tp * a_norm2(&t_ij, &g, &f, p)) + (f.powf(0.5 * p) - dp) * (p - 2.0);
            alloc::vec![(lhs, rhs)]
        }
    }
}

fn evaluate<F: Calc>(s: &IdentitySetup, xs: &[F], t: &F, t_base: f64) -> Result<(f64, f64)> {
    let u = build_field(s, xs, t, t_base)?;
    let mut res: f64 = 0.0;
    let mut mag: f64 = 0.0;
    for (l, r) in sides(s, &u, t) {
        let (lv, rv) = (l.value(), r.value());
        if !lv.is_finite() || !rv.is_finite() {
            return Err(Error::Degenerate(format!("{} not finite at the sample point", s.kind.tag())));
        }
        res = res.max(math::abs(lv - rv));
        mag = mag.max(math::abs(lv)).max(math::abs(rv));
    }
    Ok((res, mag))
}

// derivatives the identity takes of the field, plus those hidden in evolved data
fn jet_degree(s: &IdentitySetup) -> usize {
    let base = match s.kind {
        IdentityKind::BochnerElliptic | IdentityKind::Bochner2 | IdentityKind::Bochner3 | IdentityKind::MainEvol => 3,
        IdentityKind::BochnerKey => 3,
        IdentityKind::PtwiseV | IdentityKind::PtwiseW => 4,
    };
    if matches!(s.data, TestData::Evolved(_)) {
        base + 3
    } else {
        base
    }
}

/// max |LHS − RHS| over the points; each point is (x₀, …, x_{n−1}, t).
pub fn identity_residual(s: &IdentitySetup, points: &[Vec<f64>], backend: Backend) -> Result<IdentityResult> {
    check_setup(s)?;
    let n = s.n;
    let mut out = IdentityResult { kind: s.kind, max_residual: 0.0, max_magnitude: 0.0, worst_point: Vec::new(), points: 0 };
    let sp = JetSpace::new(n + 1, jet_degree(s));
    for pt in points {
        if pt.len() != n + 1 {
            return Err(invalid(format!("points must have {} coordinates (x, t)", n + 1)));
        }
        if !(pt[n] > 0.0) {
            return Err(invalid("sample times must be positive"));
        }
        let (r, m) = match backend {
            Backend::Jet => {
                let xs: Vec<Jet> = (0..n).map(|i| Jet::var(&sp, i, pt[i])).collect();
                let t = Jet::var(&sp, n, pt[n]);
                evaluate(s, &xs, &t, pt[n])?
            }
            Backend::FiniteDifference(h) => {
                if !(h > 0.0) {
                    return Err(invalid("finite-difference step must be positive"));
                }
                let xs: Vec<FdField> = (0..n).map(|i| FdField::var(i, h, pt)).collect();
                let t = FdField::var(n, h, pt);
                evaluate(s, &xs, &t, pt[n])?
            }
        };
        out.points += 1;
        out.max_magnitude = out.max_magnitude.max(m);
        if r >= out.max_residual {
            out.max_residual = r;
            out.worst_point = pt.clone();
        }
    }
    Ok(out)
}

/// Δ|∇u|² − 2|∇∇u|² − 2⟨∇u, ∇Δu⟩ with exact derivatives (the flat Bochner formula).
pub fn classical_bochner_residual(data: StaticData, point: &[f64]) -> f64 {
    let n = point.len();
    let sp = JetSpace::new(n, 4);
    let xs: Vec<Jet> = (0..n).map(|i| Jet::var(&sp, i, point[i])).collect();
    let u = static_field(data, &xs);
    let g = grad(&u, n);
    let f = dot(&g, &g);
    let lap_f = div(&grad(&f, n));
    let lap_u = div(&g);
    let r = lap_f - frob(&hessian(&u, n)) * 2.0 - dot(&g, &grad(&lap_u, n)) * 2.0;
    r.value()
}
