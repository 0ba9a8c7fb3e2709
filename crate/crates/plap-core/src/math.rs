//! Thin wrappers over `libm` so the kernels read like ordinary float code
//! without pulling in `std`.

pub use core::f64::consts::{E, LN_2, PI};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn ln1p(x: f64) -> f64 {
    libm::log1p(x)
}
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn powi(x: f64, k: i32) -> f64 {
    libm::pow(x, k as f64)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn sinh(x: f64) -> f64 {
    libm::sinh(x)
}
#[inline]
pub fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}
#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}
#[inline]
pub fn atan(x: f64) -> f64 {
    libm::atan(x)
}
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// log Γ(x) for x > 0.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// ln cosh x without overflow for large |x|.
pub fn ln_cosh(x: f64) -> f64 {
    let a = abs(x);
    a + ln1p(exp(-2.0 * a)) - LN_2
}

/// 1/cosh² x.
pub fn sech2(x: f64) -> f64 {
    let a = abs(x);
    if a > 350.0 {
        return 0.0;
    }
    let e = exp(-2.0 * a);
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Area of the unit sphere S^{k} sitting in R^{k+1}: 2π^{(k+1)/2}/Γ((k+1)/2).
pub fn sphere_area(k: usize) -> f64 {
    let m = (k + 1) as f64;
    2.0 * exp(0.5 * m * ln(PI) - ln_gamma(0.5 * m))
}

/// Negative part (x)₋ = max(−x, 0).
#[inline]
pub fn neg_part(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        0.0
    }
}

/// Conjugate exponent p* = p/(p−1).
#[inline]
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn ln_cosh_matches_direct() {
        for &x in &[0.0, 0.3, 2.0, 10.0, -4.0] {
            assert!((ln_cosh(x) - ln(cosh(x))).abs() < 1e-14);
        }
        assert!((ln_cosh(800.0) - (800.0 - LN_2)).abs() < 1e-12);
    }

    #[test]
    fn sech2_matches_direct() {
        for &x in &[0.0, 0.5, 3.0, -2.0] {
            let c = cosh(x);
            assert!((sech2(x) - 1.0 / (c * c)).abs() < 1e-15);
        }
    }
}
