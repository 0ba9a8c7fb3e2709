//! Explicit source-type solutions: the Barenblatt profile of the p-Laplace
//! heat flow and the fundamental solution of the u-equation.

use crate::calc::Calc;
use crate::error::{invalid, Result};
use crate::math;
use alloc::format;

/// β = 1/(p + n(p−2)); needs p > 2n/(n+1).
pub fn beta(p: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    if n == 0 || !(p > 2.0 * nf / (nf + 1.0)) || !p.is_finite() {
        return Err(invalid(format!("Barenblatt needs p > 2n/(n+1) = {} (got p = {p}, n = {n})", 2.0 * nf / (nf + 1.0))));
    }
    Ok(1.0 / (p + nf * (p - 2.0)))
}

/// β̄: β below p = 2 and (p−1)β above.
pub fn beta_bar(p: f64, n: usize) -> Result<f64> {
    let b = beta(p, n)?;
    Ok(if p <= 2.0 { b } else { (p - 1.0) * b })
}

fn check_barenblatt(p: f64, n: usize, t: f64) -> Result<f64> {
    if p == 2.0 {
        return Err(invalid("the Barenblatt profile needs p ≠ 2; use the heat kernel"));
    }
    if !(t > 0.0) {
        return Err(invalid(format!("time must be positive (got {t})")));
    }
    beta(p, n)
}

/// H_p at distance r from the source.
pub fn barenblatt(r: f64, t: f64, p: f64, n: usize) -> Result<f64> {
    let b = check_barenblatt(p, n, t)?;
    let k = math::powf(b, 1.0 / (p - 1.0)) * (2.0 - p) / p;
    let xi = math::abs(r) / math::powf(t, b);
    let base = 1.0 + k * math::powf(xi, p / (p - 1.0));
    if base <= 0.0 {
        return Ok(0.0);
    }
    Ok(math::powf(t, -(n as f64) * b) * math::powf(base, (p - 1.0) / (p - 2.0)))
}

/// Radius of the support at time t for p > 2; `None` (whole space) below 2.
pub fn barenblatt_support_radius(t: f64, p: f64, n: usize) -> Result<Option<f64>> {
    let b = check_barenblatt(p, n, t)?;
    if p < 2.0 {
        return Ok(None);
    }
    let xi = math::powf(p / ((p - 2.0) * math::powf(b, 1.0 / (p - 1.0))), (p - 1.0) / p);
    Ok(Some(xi * math::powf(t, b)))
}

/// Pressure ((p−1)/(p−2)) H_p^{(p−2)/(p−1)}.
pub fn barenblatt_pressure(r: f64, t: f64, p: f64, n: usize) -> Result<f64> {
    Ok(pressure_of(barenblatt(r, t, p, n)?, p))
}

/// The pressure change of variables for a density value v ≥ 0.
pub fn pressure_of(v: f64, p: f64) -> f64 {
    let e = (p - 2.0) / (p - 1.0);
    if v <= 0.0 {
        // v^e at 0 is 0 for p > 2 and +∞ for p < 2
        return if e > 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    math::powf(v, e) / e
}

/// Inverse of [`pressure_of`].
pub fn density_of(phi: f64, p: f64) -> f64 {
    let e = (p - 2.0) / (p - 1.0);
    let base = e * phi;
    if base <= 0.0 {
        return 0.0;
    }
    math::powf(base, 1.0 / e)
}

/// H_p on a [`Calc`] algebra; xs are the spatial coordinates.
pub fn barenblatt_calc<F: Calc>(xs: &[F], t: &F, p: f64, n: usize) -> Result<F> {
    let b = check_barenblatt(p, n, t.value())?;
    let k = math::powf(b, 1.0 / (p - 1.0)) * (2.0 - p) / p;
    let r2 = sum_squares(xs, &[]);
    let xi = r2.powf(0.5 * p / (p - 1.0)) * t.powf(-b * p / (p - 1.0));
    let base = xi * k + 1.0;
    Ok(t.powf(-(n as f64) * b) * base.powf((p - 1.0) / (p - 2.0)))
}

fn sum_squares<F: Calc>(xs: &[F], x0: &[f64]) -> F {
    let shift = |i: usize| x0.get(i).copied().unwrap_or(0.0);
    let mut s = (xs[0].clone() - shift(0)) * (xs[0].clone() - shift(0));
    for i in 1..xs.len() {
        let d = xs[i].clone() - shift(i);
        s = s + d.clone() * d;
    }
    s
}

/// ln of the normalization Γ(n/2+1)/(π^{n/2}(p*^{p−1}p)^{n/p}Γ(n/p*+1)).
/// At p = 1 this is the limit ln(Γ(n/2+1)/π^{n/2}).
pub fn ln_normalization(p: f64, n: usize) -> f64 {
    let nf = n as f64;
    let base = math::ln_gamma(0.5 * nf + 1.0) - 0.5 * nf * math::ln(math::PI);
    if p == 1.0 {
        return base;
    }
    let ps = math::conjugate(p);
    base - nf / p * ((p - 1.0) * math::ln(ps) + math::ln(p)) - math::ln_gamma(nf / ps + 1.0)
}

fn check_fundamental(p: f64, t: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(invalid(format!("fundamental solution needs p > 1 (got {p})")));
    }
    if !(t > 0.0) {
        return Err(invalid(format!("time must be positive (got {t})")));
    }
    Ok(())
}

/// u = −(p−1) ln v₀ = (n/p) ln t − ln(normalization) + r^{p*}/(t p*^{p−1} p)^{1/(p−1)}.
pub fn fundamental_u(r: f64, t: f64, p: f64, n: usize) -> Result<f64> {
    check_fundamental(p, t)?;
    let ps = math::conjugate(p);
    let c = t * math::powf(ps, p - 1.0) * p;
    Ok(n as f64 / p * math::ln(t) - ln_normalization(p, n) + math::powf(math::abs(r), ps) * math::powf(c, -1.0 / (p - 1.0)))
}

/// v₀ at distance r = |x − x₀| from the source.
pub fn fundamental_b_radial(r: f64, t: f64, p: f64, n: usize) -> Result<f64> {
    Ok(math::exp(-fundamental_u(r, t, p, n)? / (p - 1.0)))
}

/// v₀(x, t) with source x₀.
pub fn fundamental_b(x: &[f64], t: f64, p: f64, n: usize, x0: &[f64]) -> Result<f64> {
    if x.len() != n || x0.len() != n {
        return Err(invalid(format!("points must have {n} coordinates")));
    }
    let r = math::sqrt(x.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum());
    fundamental_b_radial(r, t, p, n)
}

/// u = −(p−1) ln v₀ on a [`Calc`] algebra.
pub fn fundamental_u_calc<F: Calc>(xs: &[F], t: &F, p: f64, x0: &[f64]) -> Result<F> {
    check_fundamental(p, t.value())?;
    let n = xs.len();
    let ps = math::conjugate(p);
    let c = math::powf(ps, p - 1.0) * p;
    let r2 = sum_squares(xs, x0);
    let tail = r2.powf(0.5 * ps) * (t.clone() * c).powf(-1.0 / (p - 1.0));
    Ok(t.ln() * (n as f64 / p) + tail - ln_normalization(p, n))
}
