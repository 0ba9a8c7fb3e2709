//! p → 1 continuation toward weak solutions of the inverse mean curvature
//! flow, the J-functionals certifying them, and properness diagnostics.

use crate::elliptic::{radial_profile, Outer};
use crate::error::{invalid, Error, Result};
use crate::field::{Mesh1d, ScalarField};
use crate::geometry::{curvature_bounds, nonparabolicity_end, v_growth_end, WarpedMetric};
use crate::math;
use alloc::format;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smoothing of |∇w| in the p = 1 functional.
pub const DELTA_TV: f64 = 1e-8;

/// A test region [a, b] ⊂ mesh, with a and b on nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Region {
    pub a: f64,
    pub b: f64,
}

fn region_nodes(mesh: &Mesh1d, k: Region) -> Result<(usize, usize)> {
    let i = mesh.node_at(k.a).ok_or_else(|| Error::Mismatch(format!("region end {} is not a mesh node", k.a)))?;
    let j = mesh.node_at(k.b).ok_or_else(|| Error::Mismatch(format!("region end {} is not a mesh node", k.b)))?;
    if j <= i {
        return Err(Error::Degenerate(format!("empty region [{}, {}]", k.a, k.b)));
    }
    Ok((i, j))
}

fn paired<'a>(u: &'a ScalarField, w: &ScalarField, k: Region) -> Result<(&'a Mesh1d, usize, usize)> {
    if !u.same_layout(w) {
        return Err(Error::Mismatch("u and w live on different meshes".into()));
    }
    let mesh = u.mesh().ok_or_else(|| Error::Mismatch("J-functionals need a 1D mesh".into()))?;
    let (i, j) = region_nodes(mesh, k)?;
    let scale = u.values.iter().fold(1.0f64, |a, &b| a.max(math::abs(b)));
    for (n, (a, b)) in u.values.iter().zip(&w.values).enumerate() {
        if (n < i || n > j) && math::abs(a - b) > 1e-12 * scale {
            return Err(Error::Mismatch(format!("w differs from u outside K at x = {}", mesh.x(n))));
        }
    }
    Ok((mesh, i, j))
}

/// J_u(w; K) = ∫_K |∇w| + w|∇u|.
pub fn j_functional(u: &ScalarField, w: &ScalarField, k: Region) -> Result<f64> {
    let (mesh, i, j) = paired(u, w, k)?;
    let gu = mesh.derivative(&u.values);
    let gw = mesh.derivative(&w.values);
    let f: Vec<f64> = (0..mesh.len())
        .map(|n| math::sqrt(gw[n] * gw[n] + DELTA_TV * DELTA_TV) + w.values[n] * math::abs(gu[n]))
        .collect();
    Ok(mesh.integrate_nodes(&f, i, j))
}

/// J^p_u(w; K) = ∫_K |∇w|^p/p + w|∇u|^p.
pub fn jp_functional(u: &ScalarField, w: &ScalarField, k: Region, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid(format!("p = {p} must be at least 1")));
    }
    let (mesh, i, j) = paired(u, w, k)?;
    let gu = mesh.derivative(&u.values);
    let gw = mesh.derivative(&w.values);
    let f: Vec<f64> = (0..mesh.len())
        .map(|n| math::powf(math::abs(gw[n]), p) / p + w.values[n] * math::powf(math::abs(gu[n]), p))
        .collect();
    Ok(mesh.integrate_nodes(&f, i, j))
}

/// A smooth bump c·exp(1 − 1/(1 − ((x−x0)/ρ)²)) supported in (x0 − ρ, x0 + ρ).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn eval(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.radius;
        if math::abs(z) >= 1.0 {
            0.0
        } else {
            self.amplitude * math::exp(1.0 - 1.0 / (1.0 - z * z))
        }
    }
}

/// Random bumps inside K with both signs and amplitude ≤ `rel_amp`·|u| nearby.
pub fn bump_family(u: &ScalarField, k: Region, count: usize, rel_amp: f64, seed: u64) -> Result<Vec<Bump>> {
    let mesh = u.mesh().ok_or_else(|| Error::Mismatch("bumps need a 1D mesh".into()))?;
    let (i, j) = region_nodes(mesh, k)?;
    let umax = (i..=j).map(|n| math::abs(u.values[n])).fold(0.0, f64::max);
    let len = k.b - k.a;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let radius = len * rng.gen_range(0.15..0.5);
        let center = rng.gen_range(k.a + radius..=k.b - radius);
        let local = math::abs(u.values[mesh.nearest(center)]).max(0.05 * umax).max(1e-3);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        out.push(Bump { center, radius, amplitude: sign * rel_amp * local * rng.gen_range(0.2..1.0) });
    }
    Ok(out)
}

/// min_w J(w) − J(u) over a sampled perturbation family.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeakSolutionCertificate {
    pub region: Region,
    /// None for the p = 1 functional.
    pub p: Option<f64>,
    pub perturbations: Vec<Bump>,
    pub j_u: f64,
    pub j_min: f64,
    pub slack: f64,
    pub worst: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Certify u against w = u + bump for every bump; `rel_tol` scales J_u(u;K).
pub fn certify(
    u: &ScalarField,
    k: Region,
    bumps: &[Bump],
    p: Option<f64>,
    rel_tol: f64,
) -> Result<WeakSolutionCertificate> {
    if bumps.is_empty() {
        return Err(invalid("empty perturbation family"));
    }
    let eval = |w: &ScalarField| match p {
        None => j_functional(u, w, k),
        Some(p) => jp_functional(u, w, k, p),
    };
    let j_u = eval(u)?;
    let mesh = u.mesh().unwrap();
    let mut j_min = f64::INFINITY;
    let mut worst = 0;
    for (n, b) in bumps.iter().enumerate() {
        let vals = (0..mesh.len()).map(|i| u.values[i] + b.eval(mesh.x(i))).collect();
        let j = eval(&u.with_values(vals))?;
        if j < j_min {
            j_min = j;
            worst = n;
        }
    }
    let slack = j_min - j_u;
    let tolerance = rel_tol * math::abs(j_u);
    Ok(WeakSolutionCertificate {
        region: k,
        p,
        perturbations: bumps.to_vec(),
        j_u,
        j_min,
        slack,
        worst,
        tolerance,
        pass: slack >= -tolerance,
    })
}

/// Outer condition of each approximating problem.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OuterMode {
    /// v at the truncation radius from the radial tail ∫^∞.
    Tail,
    /// v = 0 at the truncation radius (exhaustion by balls).
    Exhaustion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoserConfig {
    pub s0: f64,
    /// Outer edge of the working region.
    pub s_work: f64,
    /// Truncation radius per p (a single entry is reused).
    pub r_out: Vec<f64>,
    pub h: f64,
    pub mode: OuterMode,
    /// Abort once a gradient sup exceeds this multiple of max(first sup, H₊(s0)).
    pub blowup: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContinuationRow {
    pub p: f64,
    pub sup_grad: f64,
    pub r_out: f64,
    pub residual: f64,
    pub sup_u: f64,
}

#[derive(Debug, Clone)]
pub struct ContinuationRun {
    pub p_seq: Vec<f64>,
    pub solutions: Vec<ScalarField>,
    /// |∇u^{(p)}| at the nodes.
    pub gradients: Vec<Vec<f64>>,
    pub log: Vec<ContinuationRow>,
    /// Linear extrapolation to p = 1 over the last three p.
    pub limit: ScalarField,
    /// max |limit − u^{(p_last)}|
    pub continuation_error: f64,
    pub mode: OuterMode,
}

impl ContinuationRun {
    /// max over p of sup |∇u^{(p)}| on [a, b].
    pub fn gradient_sups_on(&self, a: f64, b: f64) -> Vec<f64> {
        let mesh = self.limit.mesh().unwrap();
        self.gradients
            .iter()
            .map(|g| (0..mesh.len()).filter(|&i| mesh.x(i) >= a && mesh.x(i) <= b).map(|i| g[i]).fold(0.0, f64::max))
            .collect()
    }
}

pub fn moser_scheme(m: &WarpedMetric, p_seq: &[f64], cfg: &MoserConfig) -> Result<ContinuationRun> {
    if p_seq.len() < 3 {
        return Err(invalid("continuation needs at least three p values"));
    }
    if p_seq.iter().any(|&p| !(p > 1.0)) || p_seq.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("p sequence must be strictly decreasing and > 1"));
    }
    if cfg.r_out.is_empty() || !(cfg.s_work > cfg.s0) || !(cfg.blowup > 1.0) {
        return Err(invalid("continuation radii / blow-up factor"));
    }
    if cfg.mode == OuterMode::Tail {
        let t0 = cfg.s0 + 1.0;
        let np = nonparabolicity_end(m, p_seq[0], t0, cfg.s0)?;
        if !np.converges {
            return Err(Error::NotNonparabolic(format!("p = {} on {{s ≥ {}}}", p_seq[0], cfg.s0)));
        }
    }
    let h_plus = m.mean_curvature(cfg.s0).max(0.0);
    let mut solutions = Vec::new();
    let mut gradients = Vec::new();
    let mut log = Vec::new();
    for (n, &p) in p_seq.iter().enumerate() {
        let r_out = *cfg.r_out.get(n).unwrap_or(cfg.r_out.last().unwrap());
        let outer = match cfg.mode {
            OuterMode::Tail => Outer::Infinity,
            OuterMode::Exhaustion => Outer::Zero(r_out),
        };
        let prof = match radial_profile(m, p, cfg.s0, cfg.s_work, cfg.h, outer) {
            Err(Error::Quadrature(msg)) => return Err(Error::NotNonparabolic(msg)),
            r => r?,
        };
        let sup_grad = prof.grad.iter().cloned().fold(0.0, f64::max);
        let first = log.first().map_or(sup_grad, |r: &ContinuationRow| r.sup_grad).max(h_plus);
        if !sup_grad.is_finite() || sup_grad > cfg.blowup * first {
            return Err(Error::BlowUp(format!("sup |∇u| = {sup_grad:e} at p = {p} after {first:e}")));
        }
        log.push(ContinuationRow { p, sup_grad, r_out, residual: prof.flux_residual, sup_u: prof.u.max() });
        solutions.push(prof.u);
        gradients.push(prof.grad);
    }
    // least-squares line in x = p − 1 through the last three solutions
    let k = p_seq.len();
    let xs = [p_seq[k - 3] - 1.0, p_seq[k - 2] - 1.0, p_seq[k - 1] - 1.0];
    let xm = (xs[0] + xs[1] + xs[2]) / 3.0;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let last = &solutions[k - 1];
    let mut limit = Vec::with_capacity(last.values.len());
    let mut err: f64 = 0.0;
    for i in 0..last.values.len() {
        let ys = [solutions[k - 3].values[i], solutions[k - 2].values[i], solutions[k - 1].values[i]];
        let ym = (ys[0] + ys[1] + ys[2]) / 3.0;
        let sxy: f64 = (0..3).map(|j| (xs[j] - xm) * (ys[j] - ym)).sum();
        let a = ym - sxy / sxx * xm;
        err = err.max(math::abs(a - ys[2]));
        limit.push(a);
    }
    let mut limit = last.with_values(limit);
    limit.p = 1.0;
    Ok(ContinuationRun {
        p_seq: p_seq.to_vec(),
        solutions,
        gradients,
        log,
        limit,
        continuation_error: err,
        mode: cfg.mode,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProperDiagnostics {
    /// (i) the end is p0-nonparabolic.
    pub nonparabolic: bool,
    /// 𝒱 at the sampled radii.
    pub v_samples: Vec<(f64, f64)>,
    /// (ii) log–log slope of 𝒱 over the samples is clearly negative.
    pub v_decays: bool,
    /// (iii) fitted c in u ≥ −log 𝒱 − c over the outer half of the working region.
    pub lower_bound_c: f64,
    /// c fitted on the inner and outer quarters do not drift apart.
    pub lower_bound_ok: bool,
    /// (iv) None when ∫ t·k(t) dt diverges for the curvature floor k.
    pub gradient_decays: Option<bool>,
    pub proper: bool,
}

pub fn properness_diagnostics(run: &ContinuationRun, m: &WarpedMetric, p0: f64) -> Result<ProperDiagnostics> {
    let mesh = run.limit.mesh().unwrap();
    let s0 = mesh.x0;
    let s1 = mesh.x_end();
    let nonparabolic = nonparabolicity_end(m, p0, s0 + 1.0, s0).map(|r| r.converges).unwrap_or(false);
    let mut v_samples = Vec::new();
    let mut r = 4.0 * (s0 + 1.0);
    for _ in 0..4 {
        let vg = v_growth_end(m, r, s0)?;
        v_samples.push((r, vg.value));
        r *= 10.0;
    }
    let (ra, va) = v_samples[0];
    let (rb, vb) = v_samples[v_samples.len() - 1];
    let slope = (math::ln(vb) - math::ln(va)) / (math::ln(rb) - math::ln(ra));
    let v_decays = vb.is_finite() && slope < -0.1;

    // u ≥ −log 𝒱(s) − c: compare the fitted c on two quarters of the working region
    let fit = |a: f64, b: f64| -> Result<f64> {
        let mut c = f64::NEG_INFINITY;
        for k in 0..=16 {
            let i = mesh.nearest(a + (b - a) * k as f64 / 16.0);
            let vg = v_growth_end(m, mesh.x(i), s0)?;
            c = c.max(-math::ln(vg.value) - run.limit.values[i]);
        }
        Ok(c)
    };
    let quarter = 0.25 * (s1 - s0);
    let c_mid = fit(s0 + 2.0 * quarter, s0 + 3.0 * quarter)?;
    let c_out = fit(s0 + 3.0 * quarter, s1)?;
    let lower_bound_c = c_mid.max(c_out);
    let lower_bound_ok = c_out <= c_mid + 0.05 * (1.0 + math::abs(c_mid));

    // curvature floor k(t) on doubling shells; ∫ t k dt < ∞ needs t²k(t) → 0
    let mut t2k = Vec::new();
    let mut t = 2.0 * (s0 + 1.0);
    for _ in 0..10 {
        let cb = curvature_bounds(m, t, 2.0 * t)?;
        t2k.push(4.0 * t * t * math::neg_part(cb.sectional_min));
        t *= 2.0;
    }
    let first = t2k[0];
    let last = t2k[t2k.len() - 1];
    let summable = last <= 1e-12 || last <= 0.1 * first;
    let gradient_decays = if summable {
        let g = &run.gradients[run.gradients.len() - 1];
        let inner = (0..mesh.len()).filter(|&i| mesh.x(i) <= s0 + quarter).map(|i| g[i]).fold(0.0, f64::max);
        let outer = (0..mesh.len()).filter(|&i| mesh.x(i) >= s1 - quarter).map(|i| g[i]).fold(0.0, f64::max);
        Some(outer < inner)
    } else {
        None
    };
    let proper = nonparabolic && v_decays && lower_bound_ok;
    Ok(ProperDiagnostics { nonparabolic, v_samples, v_decays, lower_bound_c, lower_bound_ok, gradient_decays, proper })
}

/// ∫ φ_R|∇u| ≤ ∫ |∇φ_R| for ramps φ_R = 1 on [s0, R], linear down to 0 at 2R − s0.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CutoffCheck {
    pub radius: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TvReport {
    /// (R, ∫_{s0}^R |∇u| dμ)
    pub total_variation: Vec<(f64, f64)>,
    pub cutoffs: Vec<CutoffCheck>,
    pub bounded: bool,
    pub pass: bool,
}

pub fn cigar_tv_bound(u: &ScalarField, radii: &[f64]) -> Result<TvReport> {
    let mesh = u.mesh().ok_or_else(|| Error::Mismatch("total variation needs a 1D mesh".into()))?;
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("cutoff radii must increase"));
    }
    let g: Vec<f64> = mesh.derivative(&u.values).iter().map(|x| math::abs(*x)).collect();
    let s0 = mesh.x0;
    let mut total_variation = Vec::new();
    let mut cutoffs = Vec::new();
    for &r in radii {
        let ir = mesh.node_at(r).ok_or_else(|| Error::Mismatch(format!("radius {r} is not a node")))?;
        let i2 = mesh.node_at(2.0 * r - s0).ok_or_else(|| Error::OutOfDomain(format!("ramp end {} off the mesh", 2.0 * r - s0)))?;
        total_variation.push((r, mesh.integrate_nodes(&g, 0, ir)));
        // ramp from R down to 0 at 2R − s0
        let width = r - s0;
        let phi: Vec<f64> = (0..mesh.len())
            .map(|i| {
                let s = mesh.x(i);
                if s <= r { 1.0 } else { (1.0 - (s - r) / width).max(0.0) }
            })
            .collect();
        let phig: Vec<f64> = phi.iter().zip(&g).map(|(a, b)| a * b).collect();
        let lhs = mesh.integrate_nodes(&phig, 0, ir) + mesh.integrate_nodes(&phig, ir, i2);
        let ones = alloc::vec![1.0 / width; mesh.len()];
        let rhs = mesh.integrate_nodes(&ones, ir, i2);
        cutoffs.push(CutoffCheck { radius: r, lhs, rhs, slack: rhs - lhs });
    }
    let bounded = match total_variation.len() {
        0..=2 => false,
        k => {
            let d1 = total_variation[k - 1].1 - total_variation[k - 2].1;
            let d0 = total_variation[k - 2].1 - total_variation[k - 3].1;
            d1 <= 0.5 * d0.max(0.0) + 1e-12 && d1 <= 1e-2 * math::abs(total_variation[k - 1].1).max(1e-12)
        }
    };
    let pass = cutoffs.iter().all(|c| c.slack >= -1e-9 * c.rhs.max(1.0));
    Ok(TvReport { total_variation, cutoffs, bounded, pass })
}
