//! Li–Yau type differential Harnack checks on finished runs and on the
//! explicit solutions.

use super::exact::{barenblatt_calc, beta, beta_bar, fundamental_u_calc};
use super::step::{EquationKind, ParabolicRun};
use crate::error::{invalid, Error, Result};
use crate::jet::{Jet, JetSpace};
use crate::math;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum HarnackId {
    /// |∇v|^p/v² − v_t/v ≤ nβ̄/t for equation A.
    ParGlobal,
    /// |∇u|^p + u_t ≤ n/(pt) for equation B.
    Lyp1,
    /// |∇u| + u_t ≤ (n−1)/t at p = 1.
    Lyp2,
    /// (|∇u|² + ε)^{p/2} + u_t ≤ n/(pt) for the regularized equation.
    GlobalApprox,
    /// The localized estimate for 1 < p < 2 with u_t ≤ 0.
    LocEstFin,
}

impl HarnackId {
    pub fn tag(&self) -> &'static str {
        match self {
            HarnackId::ParGlobal => "par-global",
            HarnackId::Lyp1 => "lyp1",
            HarnackId::Lyp2 => "lyp2",
            HarnackId::GlobalApprox => "globalapproxge",
            HarnackId::LocEstFin => "loc-estfin",
        }
    }

    pub fn parse(s: &str) -> Result<HarnackId> {
        Ok(match s {
            "par-global" => HarnackId::ParGlobal,
            "lyp1" => HarnackId::Lyp1,
            "lyp2" => HarnackId::Lyp2,
            "globalapproxge" => HarnackId::GlobalApprox,
            "loc-estfin" => HarnackId::LocEstFin,
            _ => return Err(Error::UnknownName(s.into())),
        })
    }
}

/// Worst point of one time sample.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HarnackSample {
    pub t: f64,
    /// Time entering the bound (t minus the time origin).
    pub t_eff: f64,
    /// Largest LHS over the checked points.
    pub lhs: f64,
    pub bound: f64,
    /// bound − lhs
    pub margin: f64,
    pub worst_x: f64,
    /// Extremes of LHS/bound over the checked points.
    pub ratio_max: f64,
    pub ratio_min: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HarnackReport {
    pub id: HarnackId,
    pub p: f64,
    pub n: usize,
    pub samples: Vec<HarnackSample>,
    /// Smallest margin/(abs_tol + rel_tol·|bound|) scaled slack; ≥ −1 passes.
    pub worst_slack: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub points_checked: usize,
    pub pass: bool,
    pub note: String,
}

impl HarnackReport {
    fn finish(id: HarnackId, p: f64, n: usize, samples: Vec<HarnackSample>, opts: &HarnackOptions, note: String) -> Self {
        let mut worst = f64::INFINITY;
        let mut pass = true;
        let mut points = 0;
        for s in &samples {
            let allowed = opts.abs_tol + opts.rel_tol * s.bound.abs();
            if s.margin < -allowed {
                pass = false;
            }
            let slack = if allowed > 0.0 { s.margin / allowed } else { s.margin };
            worst = worst.min(slack);
            points += s.points;
        }
        HarnackReport {
            id,
            p,
            n,
            samples,
            worst_slack: worst,
            rel_tol: opts.rel_tol,
            abs_tol: opts.abs_tol,
            points_checked: points,
            pass,
            note,
        }
    }

    pub fn ratio_range(&self) -> (f64, f64) {
        let lo = self.samples.iter().map(|s| s.ratio_min).fold(f64::INFINITY, f64::min);
        let hi = self.samples.iter().map(|s| s.ratio_max).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

#[derive(Debug, Clone)]
pub struct HarnackOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// t in the bound is measured from here; the estimates count time from the initial data.
    pub time_origin: f64,
    /// Nodes skipped at each mesh end.
    pub collar: usize,
    /// Nodes skipped around points where v vanishes (free boundary).
    pub free_collar: usize,
    /// Only nodes with x in this window are checked.
    pub window: Option<(f64, f64)>,
    /// par-global at n = 1 with β = 1/(2(p−1)).
    pub sharp_1d: bool,
    /// Snapshots before this time are skipped.
    pub t_min: f64,
}

impl Default for HarnackOptions {
    fn default() -> Self {
        HarnackOptions {
            rel_tol: 5e-2,
            abs_tol: 0.0,
            time_origin: 0.0,
            collar: 3,
            free_collar: 5,
            window: None,
            sharp_1d: false,
            t_min: f64::NEG_INFINITY,
        }
    }
}

fn par_global_beta(p: f64, n: usize, sharp_1d: bool) -> Result<f64> {
    if sharp_1d {
        if n != 1 {
            return Err(invalid("the sharp constant 1/(2(p−1)) is a one-dimensional statement"));
        }
        return Ok(1.0 / (2.0 * (p - 1.0)));
    }
    if p == 2.0 {
        return Ok(0.5);
    }
    beta_bar(p, n)
}

/// Bound of a global estimate at time t.
pub fn harnack_bound(id: HarnackId, p: f64, n: usize, t: f64, sharp_1d: bool) -> Result<f64> {
    let nf = n as f64;
    Ok(match id {
        HarnackId::ParGlobal => nf * par_global_beta(p, n, sharp_1d)? / t,
        HarnackId::Lyp1 | HarnackId::GlobalApprox => nf / (p * t),
        HarnackId::Lyp2 => (nf - 1.0) / t,
        HarnackId::LocEstFin => return Err(invalid("the localized bound needs α, K and R; use localized_check")),
    })
}

// which nodes of the mesh a check looks at
fn mask(run: &ParabolicRun, values: &[f64], opts: &HarnackOptions) -> Vec<bool> {
    let n = values.len();
    let mut m: Vec<bool> = (0..n).map(|i| i >= opts.collar && i + opts.collar < n).collect();
    if let Some((a, b)) = opts.window {
        for (i, ok) in m.iter_mut().enumerate() {
            let x = run.mesh.x(i);
            *ok &= x >= a && x <= b;
        }
    }
    if run.kind == EquationKind::A {
        for i in 0..n {
            if values[i] <= 0.0 {
                let lo = i.saturating_sub(opts.free_collar);
                let hi = (i + opts.free_collar).min(n - 1);
                for ok in &mut m[lo..=hi] {
                    *ok = false;
                }
            }
        }
    }
    m
}

/// Evaluates a global estimate on every snapshot after the first.
pub fn harnack_check(run: &ParabolicRun, id: HarnackId, opts: &HarnackOptions) -> Result<HarnackReport> {
    let ok = match id {
        HarnackId::ParGlobal => run.kind == EquationKind::A,
        HarnackId::Lyp1 => run.kind == EquationKind::B || run.kind == EquationKind::BReg,
        HarnackId::Lyp2 => matches!(run.kind, EquationKind::B | EquationKind::BReg) && run.p == 1.0,
        HarnackId::GlobalApprox => run.kind == EquationKind::BReg,
        HarnackId::LocEstFin => false,
    };
    if !ok {
        return Err(Error::Mismatch(format!("estimate {} does not apply to a {} run at p = {}", id.tag(), run.kind.tag(), run.p)));
    }
    let n = run.mesh.dim();
    let p = run.p;
    let mut samples = Vec::new();
    for snap in &run.snapshots {
        let Some(vt) = snap.time_derivative() else { continue };
        if snap.t < opts.t_min {
            continue;
        }
        let t_eff = snap.t - opts.time_origin;
        if !(t_eff > 0.0) {
            continue;
        }
        let bound = harnack_bound(id, p, n, t_eff, opts.sharp_1d)?;
        let v = &snap.values;
        let grad = run.mesh.derivative(v);
        let m = mask(run, v, opts);
        let mut s = HarnackSample {
            t: snap.t,
            t_eff,
            lhs: f64::NEG_INFINITY,
            bound,
            margin: f64::INFINITY,
            worst_x: f64::NAN,
            ratio_max: f64::NEG_INFINITY,
            ratio_min: f64::INFINITY,
            points: 0,
        };
        for i in 0..v.len() {
            if !m[i] {
                continue;
            }
            let g = grad[i].abs();
            let lhs = match id {
                HarnackId::ParGlobal => math::powf(g, p) / (v[i] * v[i]) - vt[i] / v[i],
                HarnackId::Lyp1 => math::powf(g, p) + vt[i],
                HarnackId::Lyp2 => g + vt[i],
                HarnackId::GlobalApprox => math::powf(g * g + run.eps, 0.5 * p) + vt[i],
                HarnackId::LocEstFin => unreachable!(),
            };
            if !lhs.is_finite() {
                continue;
            }
            s.points += 1;
            if lhs > s.lhs {
                s.lhs = lhs;
                s.worst_x = run.mesh.x(i);
            }
            if bound != 0.0 {
                s.ratio_max = s.ratio_max.max(lhs / bound);
                s.ratio_min = s.ratio_min.min(lhs / bound);
            }
        }
        s.margin = bound - s.lhs;
        samples.push(s);
    }
    if samples.is_empty() {
        return Err(invalid("no snapshot to check"));
    }
    Ok(HarnackReport::finish(id, p, n, samples, opts, String::new()))
}

/// LHS·t/(nβ̄) of the par-global estimate for H_p, from exact derivatives.
pub fn barenblatt_harnack_ratio(x: &[f64], t: f64, p: f64, sharp_1d: bool) -> Result<f64> {
    let n = x.len();
    beta(p, n)?;
    let sp = JetSpace::new(n + 1, 1);
    let xs: Vec<Jet> = (0..n).map(|i| Jet::var(&sp, i, x[i])).collect();
    let tj = Jet::var(&sp, n, t);
    let v = barenblatt_calc(&xs, &tj, p, n)?;
    let val = v.value();
    if !(val > 0.0) {
        return Err(Error::OutOfDomain(format!("point outside the support at t = {t}")));
    }
    let g2: f64 = (0..n).map(|i| v.first(i) * v.first(i)).sum();
    let lhs = math::powf(g2, 0.5 * p) / (val * val) - v.first(n) / val;
    Ok(lhs * t / (n as f64 * par_global_beta(p, n, sharp_1d)?))
}

/// (|∇u|^p + u_t)·pt/n for u = −(p−1) ln v₀, from exact derivatives.
pub fn fundamental_lyp1_ratio(x: &[f64], t: f64, p: f64, x0: &[f64]) -> Result<f64> {
    let n = x.len();
    let sp = JetSpace::new(n + 1, 1);
    let xs: Vec<Jet> = (0..n).map(|i| Jet::var(&sp, i, x[i])).collect();
    let tj = Jet::var(&sp, n, t);
    let u = fundamental_u_calc(&xs, &tj, p, x0)?;
    let g2: f64 = (0..n).map(|i| u.first(i) * u.first(i)).sum();
    let lhs = math::powf(g2, 0.5 * p) + u.first(n);
    Ok(lhs * p * t / n as f64)
}

/// Constants of the localized estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalizedConstants {
    pub n: usize,
    pub p: f64,
    pub alpha: f64,
    pub k: f64,
    pub r: f64,
    pub c1: f64,
    pub c2: f64,
    pub c2_prime: f64,
    pub c3: f64,
}

pub fn localized_constants(n: usize, p: f64, alpha: f64, k: f64, r: f64) -> Result<LocalizedConstants> {
    if !(p > 1.0 && p < 2.0) {
        return Err(invalid(format!("the localized estimate needs 1 < p < 2 (got {p})")));
    }
    if !(alpha > 1.0) || !(k >= 0.0) || !(r > 0.0) {
        return Err(invalid(format!("need α > 1, K ≥ 0, R > 0 (got {alpha}, {k}, {r})")));
    }
    let nf = n as f64;
    let c1 = 40.0 * (nf + p - 2.0) * (1.0 + k * r) - 20.0;
    let mid = 20.0 + (2.0 - p) * (alpha - 1.0) / alpha;
    let c2 = c1 + 100.0 + mid * mid * nf * alpha * alpha / (4.0 * (alpha - 1.0)) + 50.0 * (2.0 - p) / (p - 1.0);
    let c2_prime = c2 + nf * (2.0 - p) * (2.0 - p);
    let c3 = 0.5 * p * math::powf(4.0 * nf * alpha * alpha * (2.0 - p), 0.5 * (2.0 - p));
    Ok(LocalizedConstants { n, p, alpha, k, r, c1, c2, c2_prime, c3 })
}

impl LocalizedConstants {
    /// Right-hand side of the localized estimate at time t.
    pub fn rhs(&self, t: f64) -> f64 {
        let nf = self.n as f64;
        let a2 = self.alpha * self.alpha;
        let first = math::powf(
            8.0 * nf * a2 * (self.c2_prime / (self.r * self.r) + self.c3 / math::powf(t, 2.0 / self.p)),
            0.5 * self.p,
        );
        let second = math::powf(4.0 * nf * (nf - 1.0) * self.k * self.k, 0.5 * self.p)
            * math::powf(self.alpha / (self.alpha - 1.0), self.p);
        first.max(second)
    }
}

/// sup over the ball of (|∇u|² + ε)^{p/2} + α u_t against the localized bound, for every snapshot.
///
/// On a radial mesh the ball B(x₀, R/2) is replaced by the shell of radii within
/// R/2 of x₀, which contains it.
pub fn localized_check(
    run: &ParabolicRun,
    alpha: f64,
    k: f64,
    r: f64,
    x0: f64,
    opts: &HarnackOptions,
) -> Result<HarnackReport> {
    if !matches!(run.kind, EquationKind::BReg | EquationKind::B) {
        return Err(Error::Mismatch(format!("loc-estfin needs a B or B-reg run, not {}", run.kind.tag())));
    }
    let n = run.mesh.dim();
    let consts = localized_constants(n, run.p, alpha, k, r)?;
    let ut_max = run.max_time_derivative();
    if ut_max > 1e-8 {
        return Err(invalid(format!("hypothesis u_t ≤ 0 violated: max u_t = {ut_max:e}")));
    }
    let p = run.p;
    let mut samples = Vec::new();
    for snap in &run.snapshots {
        let Some(ut) = snap.time_derivative() else { continue };
        let t_eff = snap.t - opts.time_origin;
        if !(t_eff > 0.0) || snap.t < opts.t_min {
            continue;
        }
        let bound = consts.rhs(t_eff);
        let grad = run.mesh.derivative(&snap.values);
        let mut s = HarnackSample {
            t: snap.t,
            t_eff,
            lhs: f64::NEG_INFINITY,
            bound,
            margin: 0.0,
            worst_x: f64::NAN,
            ratio_max: f64::NEG_INFINITY,
            ratio_min: f64::INFINITY,
            points: 0,
        };
        let len = snap.values.len();
        for i in opts.collar..len.saturating_sub(opts.collar) {
            let x = run.mesh.x(i);
            if (x - x0).abs() > 0.5 * r {
                continue;
            }
            let lhs = math::powf(grad[i] * grad[i] + run.eps, 0.5 * p) + alpha * ut[i];
            s.points += 1;
            if lhs > s.lhs {
                s.lhs = lhs;
                s.worst_x = x;
            }
            s.ratio_max = s.ratio_max.max(lhs / bound);
            s.ratio_min = s.ratio_min.min(lhs / bound);
        }
        if s.points == 0 {
            return Err(invalid(format!("no mesh node within R/2 = {} of {x0}", 0.5 * r)));
        }
        s.margin = bound - s.lhs;
        samples.push(s);
    }
    let note = format!("C1 = {}, C2 = {}, C2' = {}, C3 = {}", consts.c1, consts.c2, consts.c2_prime, consts.c3);
    Ok(HarnackReport::finish(HarnackId::LocEstFin, p, n, samples, opts, note))
}
