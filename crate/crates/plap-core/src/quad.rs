//! Adaptive Gauss–Kronrod quadrature and improper integrals with a power-law
//! tail classifier.

use crate::error::{Error, Result};
use crate::math;
use alloc::format;
use alloc::vec::Vec;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel: (Kronrod value, |Kronrod − Gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = r * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * r, math::abs((k - g) * r))
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts { abs_tol: 1e-300, rel_tol: 1e-12, max_panels: 4000 }
    }
}

/// Globally adaptive Gauss–Kronrod on [a, b].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOpts) -> Result<f64> {
    integrate_err(&mut f, a, b, opts).map(|(v, _)| v)
}

/// As [`integrate`] but also returns the error estimate.
pub fn integrate_err<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    opts: QuadOpts,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(f, a, b);
    panels.push((a, b, v, e));
    let mut total = v;
    let mut err = e;
    loop {
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * math::abs(total)) {
            return Ok((total, err));
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::Quadrature(format!(
                "[{a}, {b}]: error {err:e} after {} panels",
                panels.len()
            )));
        }
        let (imax, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, pv, pe) = panels.swap_remove(imax);
        let m = 0.5 * (pa + pb);
        if m <= pa || m >= pb {
            // interval exhausted in floating point; accept what we have
            return Ok((total, err));
        }
        let (v1, e1) = gk15(f, pa, m);
        let (v2, e2) = gk15(f, m, pb);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        panels.push((pa, m, v1, e1));
        panels.push((m, pb, v2, e2));
        // the running sum drifts; resync now and then
        if panels.len() % 64 == 0 {
            total = panels.iter().map(|p| p.2).sum();
            err = panels.iter().map(|p| p.3).sum();
        }
    }
}

/// Outcome of an integral over [a, ∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Improper {
    Converged { value: f64, tail: f64, exponent: f64 },
    /// Integrand decays no faster than t^{exponent} with exponent ≥ −1.
    Diverged { exponent: f64 },
}

impl Improper {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Improper::Converged { value, .. } => Some(value),
            Improper::Diverged { .. } => None,
        }
    }
}

/// ∫_a^∞ f for positive f, doubling the cutoff T and extrapolating the tail
/// from the local log–log slope of f. Declares divergence when the slope
/// settles at or above −1.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: f64) -> Result<Improper> {
    let opts = QuadOpts { rel_tol: 1e-13, ..QuadOpts::default() };
    let mut t = if a > 0.0 { 2.0 * a } else { 1.0 };
    let mut acc = integrate_err(&mut f, a, t, opts)?.0;
    let mut prev_est = f64::NAN;
    let mut prev_slope = f64::NAN;
    let mut stable_div = 0;
    let cap = (a.abs() + 1.0) * 1e13;
    while t < cap {
        let ft = f(t);
        if ft == 0.0 || !ft.is_finite() && ft < 0.0 {
            return Ok(Improper::Converged { value: acc, tail: 0.0, exponent: f64::NEG_INFINITY });
        }
        if !ft.is_finite() {
            return Err(Error::Quadrature(format!("integrand not finite at {t}")));
        }
        let fh = f(0.5 * t);
        let slope = if fh > 0.0 { math::ln(ft / fh) / math::LN_2 } else { f64::NEG_INFINITY };
        if slope < -1.0 - 1e-7 {
            let tail = if slope.is_finite() { ft * t / (-slope - 1.0) } else { 0.0 };
            let est = acc + tail;
            if (est - prev_est).abs() <= tol * est.abs().max(f64::MIN_POSITIVE) {
                return Ok(Improper::Converged { value: est, tail, exponent: slope });
            }
            prev_est = est;
            stable_div = 0;
        } else {
            // slope at or above −1: confirm it is not a transient
            if (slope - prev_slope).abs() < 1e-4 {
                stable_div += 1;
            } else {
                stable_div = 0;
            }
            if stable_div >= 3 && t > 64.0 * (a.abs() + 1.0) {
                return Ok(Improper::Diverged { exponent: slope });
            }
        }
        prev_slope = slope;
        acc += integrate_err(&mut f, t, 2.0 * t, opts)?.0;
        t *= 2.0;
    }
    Err(Error::Unclassifiable(format!("tail of integral from {a} undecided at T = {t:e}")))
}

/// Composite Simpson weights for `n` equally spaced nodes (n odd uses pure
/// Simpson; n even closes with a 3/8 panel).
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = alloc::vec![0.0; n];
    if n < 2 {
        return w;
    }
    if n == 2 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let simpson_end = if n % 2 == 1 { n - 1 } else { n - 4 };
    let mut i = 0;
    while i + 2 <= simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if n % 2 == 0 {
        let j = n - 4;
        w[j] += 3.0 * h / 8.0;
        w[j + 1] += 9.0 * h / 8.0;
        w[j + 2] += 9.0 * h / 8.0;
        w[j + 3] += 3.0 * h / 8.0;
    }
    w
}

/// Gauss–Legendre nodes/weights on [−1, 1] (5 points).
pub const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
pub const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Fixed 5-point Gauss–Legendre on [a, b].
pub fn gl5<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut s = 0.0;
    for k in 0..5 {
        s += GL5_W[k] * f(c + r * GL5_X[k]);
    }
    s * r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_exact_on_polynomials() {
        // K15 integrates degree ≤ 22 exactly
        let (v, _) = gk15(&mut |x: f64| x.powi(22) + 3.0 * x.powi(5), -1.0, 1.0);
        assert!((v - 2.0 / 23.0).abs() < 1e-15);
        let (v, _) = gk15(&mut |x: f64| x.powi(12), 0.0, 1.0);
        assert!((v - 1.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let v = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, QuadOpts::default()).unwrap();
        let exact = 2.0 * math::atan(1.0 / 1e-2) / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn power_tail_is_extrapolated() {
        let r = integrate_to_infinity(|t| t.powf(-4.0), 1.0, 1e-12).unwrap();
        assert!((r.value().unwrap() - 1.0 / 3.0).abs() < 1e-11);
        let r = integrate_to_infinity(|t| t.powf(-1.05), 1.0, 1e-12).unwrap();
        assert!((r.value().unwrap() - 20.0).abs() < 1e-8);
    }

    #[test]
    fn borderline_tails_diverge() {
        assert!(matches!(integrate_to_infinity(|t| 1.0 / t, 1.0, 1e-12).unwrap(), Improper::Diverged { .. }));
        assert!(matches!(integrate_to_infinity(|_| 0.3, 1.0, 1e-12).unwrap(), Improper::Diverged { .. }));
        assert!(matches!(
            integrate_to_infinity(|t| t.powf(-0.9), 1.0, 1e-12).unwrap(),
            Improper::Diverged { .. }
        ));
    }

    #[test]
    fn exponential_tail() {
        let r = integrate_to_infinity(|t| math::exp(-t), 0.0, 1e-12).unwrap();
        assert!((r.value().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_weights_integrate_cubics() {
        for n in [5usize, 6, 9, 12] {
            let h = 1.0 / (n - 1) as f64;
            let w = simpson_weights(n, h);
            let s: f64 = (0..n).map(|i| w[i] * (i as f64 * h).powi(3)).sum();
            assert!((s - 0.25).abs() < 1e-14, "n={n}");
        }
    }
}
