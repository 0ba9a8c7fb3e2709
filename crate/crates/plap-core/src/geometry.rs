//! Rotationally symmetric manifolds g = ds² + w(s)² g_{S^{n−1}}: curvature,
//! volume growth and the end criteria used by the IMCF construction.

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::quad::{self, Improper, QuadOpts};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Builtin warp profiles. All of them have a pole at s = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MetricName {
    Euclidean,
    Hyperbolic(f64),
    Cigar,
    PowerGrowth(f64),
}

impl MetricName {
    /// Parse `euclidean`, `hyperbolic(K)`, `cigar`, `power_growth(γ)`.
    pub fn parse(s: &str) -> Result<MetricName> {
        let s = s.trim();
        let arg = |prefix: &str| -> Option<Result<f64>> {
            let rest = s.strip_prefix(prefix)?;
            let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
            Some(inner.trim().parse::<f64>().map_err(|_| invalid(format!("bad number in {s}"))))
        };
        match s {
            "euclidean" => return Ok(MetricName::Euclidean),
            "cigar" => return Ok(MetricName::Cigar),
            _ => {}
        }
        if let Some(k) = arg("hyperbolic") {
            return Ok(MetricName::Hyperbolic(k?));
        }
        if let Some(g) = arg("power_growth") {
            return Ok(MetricName::PowerGrowth(g?));
        }
        Err(Error::UnknownName(String::from(s)))
    }

    pub fn tag(&self) -> String {
        match *self {
            MetricName::Euclidean => "euclidean".into(),
            MetricName::Hyperbolic(k) => format!("hyperbolic({k})"),
            MetricName::Cigar => "cigar".into(),
            MetricName::PowerGrowth(g) => format!("power_growth({g})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MetricKind {
    Pole,
    End { s0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Warp {
    Flat,
    Sinh { k: f64 },
    Tanh,
    // w = s (1 + s²)^a with a = (q − 1)/2, so w ~ s^q at infinity
    Power { a: f64 },
}

/// A warped product over S^{n−1} with closed-form w, w′, w″.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpedMetric {
    pub n: usize,
    pub kind: MetricKind,
    pub name: MetricName,
    warp: Warp,
}

/// Build one of the builtin metrics. The cigar is two-dimensional whatever `n` says.
pub fn builtin_metric(name: MetricName, n: usize) -> Result<WarpedMetric> {
    if n < 2 {
        return Err(invalid(format!("dimension n = {n} must be at least 2")));
    }
    let (warp, n) = match name {
        MetricName::Euclidean => (Warp::Flat, n),
        MetricName::Hyperbolic(k) => {
            if !(k > 0.0 && k.is_finite()) {
                return Err(invalid(format!("hyperbolic K = {k} must be positive")));
            }
            (Warp::Sinh { k }, n)
        }
        MetricName::Cigar => (Warp::Tanh, 2),
        MetricName::PowerGrowth(g) => {
            if !(g > 1.0 && g.is_finite()) {
                return Err(invalid(format!("power growth exponent {g} must exceed 1")));
            }
            let q = (g - 1.0) / (n as f64 - 1.0);
            (Warp::Power { a: 0.5 * (q - 1.0) }, n)
        }
    };
    let m = WarpedMetric { n, kind: MetricKind::Pole, name, warp };
    debug_assert!(m.w(0.0) == 0.0 && (m.dw(0.0) - 1.0).abs() < 1e-12);
    Ok(m)
}

impl WarpedMetric {
    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    /// Inner edge of the domain of s.
    pub fn s_min(&self) -> f64 {
        match self.kind {
            MetricKind::Pole => 0.0,
            MetricKind::End { s0 } => s0,
        }
    }

    pub fn check_domain(&self, s: f64) -> Result<()> {
        if s < self.s_min() || !s.is_finite() {
            return Err(Error::OutOfDomain(format!("s = {s} for {}", self.name.tag())));
        }
        Ok(())
    }

    pub fn w(&self, s: f64) -> f64 {
        match self.warp {
            Warp::Flat => s,
            Warp::Sinh { k } => math::sinh(k * s) / k,
            Warp::Tanh => math::tanh(s),
            Warp::Power { a } => s * math::powf(1.0 + s * s, a),
        }
    }

    pub fn dw(&self, s: f64) -> f64 {
        match self.warp {
            Warp::Flat => 1.0,
            Warp::Sinh { k } => math::cosh(k * s),
            Warp::Tanh => math::sech2(s),
            Warp::Power { a } => {
                let u = 1.0 + s * s;
                math::powf(u, a - 1.0) * (1.0 + (1.0 + 2.0 * a) * s * s)
            }
        }
    }

    pub fn d2w(&self, s: f64) -> f64 {
        match self.warp {
            Warp::Flat => 0.0,
            Warp::Sinh { k } => k * math::sinh(k * s),
            Warp::Tanh => -2.0 * math::sech2(s) * math::tanh(s),
            Warp::Power { a } => {
                let u = 1.0 + s * s;
                let b = 1.0 + 2.0 * a;
                2.0 * s * (a - 1.0) * math::powf(u, a - 2.0) * (1.0 + b * s * s)
                    + math::powf(u, a - 1.0) * 2.0 * b * s
            }
        }
    }

    /// ln w(s), stable where w itself would overflow.
    pub fn ln_w(&self, s: f64) -> f64 {
        match self.warp {
            Warp::Sinh { k } => {
                let x = k * s;
                if x > 20.0 {
                    x - math::LN_2 + math::ln1p(-math::exp(-2.0 * x)) - math::ln(k)
                } else {
                    math::ln(math::sinh(x) / k)
                }
            }
            Warp::Power { a } => math::ln(s) + a * math::ln1p(s * s),
            _ => math::ln(self.w(s)),
        }
    }

    /// Sectional curvature of planes containing ∂_s: −w″/w.
    pub fn radial_sectional(&self, s: f64) -> f64 {
        match self.warp {
            Warp::Flat => 0.0,
            Warp::Sinh { k } => -k * k,
            Warp::Tanh => 2.0 * math::sech2(s),
            Warp::Power { a } => {
                // divide w″ by w analytically to stay finite at the pole
                let u = 1.0 + s * s;
                let b = 1.0 + 2.0 * a;
                -(2.0 * (a - 1.0) * (1.0 + b * s * s) / (u * u) + 2.0 * b / u)
            }
        }
    }

    /// Sectional curvature of planes tangent to the spheres: (1 − w′²)/w².
    pub fn spherical_sectional(&self, s: f64) -> f64 {
        match self.warp {
            Warp::Flat => 0.0,
            Warp::Sinh { k } => -k * k,
            Warp::Tanh => {
                // 1 − sech⁴ over tanh², finite as s → 0
                let t = math::tanh(s);
                if t.abs() < 1e-6 {
                    return 2.0;
                }
                let c = math::sech2(s);
                (1.0 - c * c) / (t * t)
            }
            Warp::Power { a } => {
                if s < 1e-7 {
                    // w = s + a s³ + …, so (1 − w′²)/w² → −6a
                    return -6.0 * a;
                }
                let b = 1.0 + 2.0 * a;
                let l = (a - 1.0) * math::ln1p(s * s) + math::ln1p(b * s * s);
                let one_minus = -math::expm1(l);
                let wp = 1.0 - one_minus;
                let w = self.w(s);
                one_minus * (1.0 + wp) / (w * w)
            }
        }
    }

    /// Ricci eigenvalue in the radial direction: −(n−1)w″/w.
    pub fn ricci_radial(&self, s: f64) -> f64 {
        (self.dim() - 1.0) * self.radial_sectional(s)
    }

    /// Ricci eigenvalue tangent to the spheres: −w″/w + (n−2)(1−w′²)/w².
    pub fn ricci_tangential(&self, s: f64) -> f64 {
        self.radial_sectional(s) + (self.dim() - 2.0) * self.spherical_sectional(s)
    }

    /// Mean curvature of the sphere {s} with respect to ∂_s: (n−1)w′/w.
    pub fn mean_curvature(&self, s: f64) -> f64 {
        (self.dim() - 1.0) * self.dw(s) / self.w(s)
    }

    /// Laplacian of the distance function, Δs = (n−1)w′/w.
    pub fn laplacian_r(&self, s: f64) -> f64 {
        self.mean_curvature(s)
    }

    /// Area density of the sphere {s}: ω_{n−1} w(s)^{n−1}.
    pub fn area(&self, s: f64) -> f64 {
        let wn = match self.warp {
            Warp::Sinh { .. } => math::exp((self.dim() - 1.0) * self.ln_w(s)),
            _ => math::powi(self.w(s), self.n as i32 - 1),
        };
        math::sphere_area(self.n - 1) * wn
    }

    /// Volume of the shell a ≤ s ≤ b.
    pub fn shell_volume(&self, a: f64, b: f64) -> Result<f64> {
        let opts = QuadOpts { rel_tol: 1e-13, ..QuadOpts::default() };
        // split long intervals so the panels see comparable magnitudes
        if b - a > 64.0 && a >= 0.0 {
            let mut acc = 0.0;
            let mut lo = a;
            let mut hi = a + 32.0;
            while lo < b {
                let top = if hi > b { b } else { hi };
                acc += quad::integrate(|s| self.area(s), lo, top, opts)?;
                lo = top;
                hi = lo + (lo - a).max(32.0);
            }
            return Ok(acc);
        }
        quad::integrate(|s| self.area(s), a, b, opts)
    }
}

/// Sampled curvature extremes over an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvatureBounds {
    pub sectional_min: f64,
    pub sectional_max: f64,
    pub ricci_min: f64,
    pub ricci_max: f64,
}

impl CurvatureBounds {
    /// K ≥ 0 with K_M ≥ −K², the convention of the interior gradient estimate.
    pub fn k_sectional(&self) -> f64 {
        math::sqrt(math::neg_part(self.sectional_min))
    }

    /// κ ≥ 0 with Rc ≥ −(n−1)κ g, the convention of the boundary barrier.
    pub fn kappa_ricci(&self, n: usize) -> f64 {
        math::neg_part(self.ricci_min) / (n as f64 - 1.0)
    }
}

pub fn curvature_bounds(m: &WarpedMetric, a: f64, b: f64) -> Result<CurvatureBounds> {
    if !(a <= b) {
        return Err(invalid(format!("empty interval [{a}, {b}]")));
    }
    m.check_domain(a)?;
    m.check_domain(b)?;
    const N: usize = 1001;
    let mut cb = CurvatureBounds {
        sectional_min: f64::INFINITY,
        sectional_max: f64::NEG_INFINITY,
        ricci_min: f64::INFINITY,
        ricci_max: f64::NEG_INFINITY,
    };
    for i in 0..N {
        let s = a + (b - a) * i as f64 / (N - 1) as f64;
        let mut sec = alloc::vec![m.radial_sectional(s)];
        if m.n >= 3 {
            sec.push(m.spherical_sectional(s));
        }
        let ric = [m.ricci_radial(s), m.ricci_tangential(s)];
        for &k in sec.iter() {
            cb.sectional_min = cb.sectional_min.min(k);
            cb.sectional_max = cb.sectional_max.max(k);
        }
        for &k in ric.iter() {
            cb.ricci_min = cb.ricci_min.min(k);
            cb.ricci_max = cb.ricci_max.max(k);
        }
    }
    Ok(cb)
}

/// Volume of the geodesic ball of radius t about the pole.
pub fn ball_volume(m: &WarpedMetric, t: f64) -> Result<f64> {
    m.check_domain(t)?;
    m.shell_volume(m.s_min(), t)
}

/// Volume of the end {s ≥ s0} inside B(o, t).
fn end_volume(m: &WarpedMetric, t: f64, s0: f64) -> Result<f64> {
    if t <= s0 {
        return Ok(0.0);
    }
    m.shell_volume(s0, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NonParabolicity {
    pub converges: bool,
    /// Value of the integral when it converges.
    pub value: Option<f64>,
    /// Asymptotic log–log slope of the integrand.
    pub exponent: f64,
}

/// ∫_{t0}^∞ (t/V(t))^{1/(p−1)} dt over the whole manifold.
pub fn nonparabolicity(m: &WarpedMetric, p: f64, t0: f64) -> Result<NonParabolicity> {
    nonparabolicity_impl(m, p, t0, None)
}

/// Same integral for the end {s ≥ s0}, with V(Ω ∩ B(o,t)) = V(t) − V(s0).
pub fn nonparabolicity_end(m: &WarpedMetric, p: f64, t0: f64, s0: f64) -> Result<NonParabolicity> {
    if t0 <= s0 {
        return Err(invalid(format!("t0 = {t0} must exceed the end radius {s0}")));
    }
    nonparabolicity_impl(m, p, t0, Some(s0))
}

fn nonparabolicity_impl(m: &WarpedMetric, p: f64, t0: f64, end: Option<f64>) -> Result<NonParabolicity> {
    if !(p > 1.0) {
        return Err(invalid(format!("p = {p} must exceed 1")));
    }
    if !(t0 > 0.0) {
        return Err(invalid(format!("t0 = {t0} must be positive")));
    }
    let e = 1.0 / (p - 1.0);
    let mut failure = None;
    let integrand = |t: f64| {
        let v = match end {
            None => ball_volume(m, t),
            Some(s0) => end_volume(m, t, s0),
        };
        match v {
            Ok(v) if v.is_infinite() => 0.0,
            Ok(v) => math::exp(e * (math::ln(t) - math::ln(v))),
            Err(err) => {
                failure = Some(err);
                f64::NAN
            }
        }
    };
    let res = quad::integrate_to_infinity(integrand, t0, 1e-10);
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(match res? {
        Improper::Converged { value, exponent, .. } => {
            NonParabolicity { converges: true, value: Some(value), exponent }
        }
        Improper::Diverged { exponent } => NonParabolicity { converges: false, value: None, exponent },
    })
}

/// 𝒱(r) = sup_{t ≥ 2r} t/V(t), together with where the sup sits and how the
/// tail was certified.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VGrowth {
    pub value: f64,
    pub argmax: f64,
    /// log–log slope of t/V(t) at the sampling horizon.
    pub tail_slope: f64,
    pub horizon: f64,
}

pub fn v_growth(m: &WarpedMetric, r: f64) -> Result<VGrowth> {
    v_growth_impl(m, r, None)
}

pub fn v_growth_end(m: &WarpedMetric, r: f64, s0: f64) -> Result<VGrowth> {
    v_growth_impl(m, r, Some(s0))
}

fn v_growth_impl(m: &WarpedMetric, r: f64, end: Option<f64>) -> Result<VGrowth> {
    if !(r > 0.0) {
        return Err(invalid(format!("r = {r} must be positive")));
    }
    let g = |t: f64| -> Result<f64> {
        let v = match end {
            None => ball_volume(m, t)?,
            Some(s0) => end_volume(m, t, s0)?,
        };
        Ok(if v.is_infinite() { 0.0 } else if v == 0.0 { f64::INFINITY } else { t / v })
    };
    let t_lo = 2.0 * r;
    let doublings = 24;
    let per = 16;
    let mut best = (f64::NEG_INFINITY, t_lo);
    let mut samples = Vec::with_capacity(doublings * per + 1);
    for i in 0..=doublings * per {
        let t = t_lo * math::powf(2.0, i as f64 / per as f64);
        let gt = g(t)?;
        samples.push((t, gt));
        if gt > best.0 {
            best = (gt, t);
        }
    }
    // polish an interior maximum by golden section
    if best.1 > t_lo && best.1 < samples[samples.len() - 1].0 {
        let f = 1.0 / 1.618_033_988_749_895;
        let (mut a, mut b) = (best.1 * math::powf(2.0, -1.0 / per as f64), best.1 * math::powf(2.0, 1.0 / per as f64));
        for _ in 0..60 {
            let c = b - f * (b - a);
            let d = a + f * (b - a);
            if g(c)? > g(d)? {
                b = d;
            } else {
                a = c;
            }
        }
        let t = 0.5 * (a + b);
        let gt = g(t)?;
        if gt > best.0 {
            best = (gt, t);
        }
    }
    let n = samples.len();
    let (t1, g1) = samples[n - 1];
    let (_, g0) = samples[n - 1 - per];
    let (_, gm) = samples[n - 1 - 2 * per];
    let slope = if g1 > 0.0 && g0 > 0.0 { math::ln(g1 / g0) / math::LN_2 } else { f64::NEG_INFINITY };
    let prev_slope = if g0 > 0.0 && gm > 0.0 { math::ln(g0 / gm) / math::LN_2 } else { f64::NEG_INFINITY };
    let mut value = best.0;
    if slope > 1e-3 {
        // t/V still growing at the horizon: the sup is infinite
        if prev_slope > 1e-3 {
            return Ok(VGrowth { value: f64::INFINITY, argmax: f64::INFINITY, tail_slope: slope, horizon: t1 });
        }
        return Err(Error::Unclassifiable(format!("t/V slope {slope} at horizon {t1:e}")));
    }
    if slope > -1e-3 && g1 > 0.0 {
        // flat tail: Aitken limit of the last three doublings bounds the remainder
        let d1 = g1 - g0;
        let d0 = g0 - gm;
        let lim = if (d1 - d0).abs() > 1e-300 { g1 - d1 * d1 / (d1 - d0) } else { g1 };
        if lim > value {
            value = lim;
            best.1 = f64::INFINITY;
        }
    }
    Ok(VGrowth { value, argmax: best.1, tail_slope: slope, horizon: t1 })
}

/// Tabulated volume growth data for one metric.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VolumeGrowthReport {
    pub p: f64,
    pub t: Vec<f64>,
    pub volume: Vec<f64>,
    pub r: Vec<f64>,
    pub v_growth: Vec<f64>,
    pub nonparabolicity: NonParabolicity,
    /// Whether the sampled 𝒱 values are nonincreasing.
    pub v_growth_monotone: bool,
}

pub fn volume_growth_report(m: &WarpedMetric, p: f64, t: &[f64], r: &[f64]) -> Result<VolumeGrowthReport> {
    let mut volume = Vec::with_capacity(t.len());
    for &ti in t {
        volume.push(ball_volume(m, ti)?);
    }
    if volume.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonConvergence(String::from("sampled volumes are not increasing")));
    }
    let mut vg = Vec::with_capacity(r.len());
    for &ri in r {
        vg.push(v_growth(m, ri)?.value);
    }
    let v_growth_monotone = vg.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let np = nonparabolicity(m, p, 1.0)?;
    Ok(VolumeGrowthReport { p, t: t.to_vec(), volume, r: r.to_vec(), v_growth: vg, nonparabolicity: np, v_growth_monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!(MetricName::parse("hyperbolic(2.5)").unwrap(), MetricName::Hyperbolic(2.5));
        assert_eq!(MetricName::parse(" cigar ").unwrap(), MetricName::Cigar);
        assert!(matches!(MetricName::parse("sphere"), Err(Error::UnknownName(_))));
        assert!(builtin_metric(MetricName::Hyperbolic(-1.0), 3).is_err());
        assert!(builtin_metric(MetricName::PowerGrowth(1.0), 3).is_err());
    }

    #[test]
    fn power_growth_pole_and_derivatives() {
        let m = builtin_metric(MetricName::PowerGrowth(1.5), 2).unwrap();
        assert_eq!(m.w(0.0), 0.0);
        assert!((m.dw(0.0) - 1.0).abs() < 1e-15);
        for &s in &[0.3, 1.0, 4.0] {
            let h = 1e-5;
            let fd1 = (m.w(s + h) - m.w(s - h)) / (2.0 * h);
            let fd2 = (m.dw(s + h) - m.dw(s - h)) / (2.0 * h);
            assert!((fd1 - m.dw(s)).abs() < 1e-8);
            assert!((fd2 - m.d2w(s)).abs() < 1e-8);
            assert!((m.radial_sectional(s) + m.d2w(s) / m.w(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn spherical_curvature_near_pole_is_continuous() {
        let m = builtin_metric(MetricName::PowerGrowth(2.2), 3).unwrap();
        let a = m.spherical_sectional(1e-8);
        let b = m.spherical_sectional(1e-3);
        assert!((a - b).abs() < 1e-4);
    }
}
