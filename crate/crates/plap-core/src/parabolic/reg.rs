//! The ε-regularization of the pressure equation: ζ_ε, φ_ε, ψ_ε.

use crate::error::{invalid, Result};
use crate::math;
use crate::quad::{self, QuadOpts, GL5_W, GL5_X};
use alloc::format;
use alloc::vec::Vec;

/// ζ_ε, φ_ε and ψ_ε for one (p, ε).
///
/// The bridge lives in τ = ln r on [ln a_ε, ln ε]: ln ζ = ±ε·G(τ − ln a_ε),
/// where G′ is a plateau of height ≤ 1 with quintic smoothstep ramps. The
/// slope bound |rζ′| ≤ εζ therefore holds by construction.
#[derive(Debug, Clone)]
pub struct RegFunctions {
    pub p: f64,
    pub eps: f64,
    /// Underflows to 0 for small ε; `ln_a` is always exact.
    pub a_eps: f64,
    pub ln_a: f64,
    ln_eps: f64,
    len: f64,
    ramp: f64,
    height: f64,
    sign: f64,
    /// The ramps fill the whole interval and the plateau is lowered below 1.
    pub rescaled: bool,
    dtau: f64,
    // at τ_k = ln_a + k·dtau: ln φ_ε and ∫₀^{r_k} s φ_ε(s) ds
    ln_phi: Vec<f64>,
    int_sphi: Vec<f64>,
}

/// Outcome of [`RegFunctions::check_invariants`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegCheck {
    pub p: f64,
    pub eps: f64,
    /// max |ζ − 1| on [0, a_ε] and max |ζ − (p−1)| on [ε, ∞).
    pub zeta_end_error: f64,
    /// max |rζ′|/(εζ) on (a_ε, ε); must not exceed 1.
    pub slope_ratio: f64,
    /// max relative |φ_ε − r^{p−2}| on [ε, ∞).
    pub phi_power_error: f64,
    /// max |rφ′/φ − (ζ − 1)| by a centered difference in ln r.
    pub phi_ode_error: f64,
    /// max relative deviation of ψ_ε from an independent quadrature of its definition.
    pub psi_error: f64,
    pub samples: usize,
    pub pass: bool,
}

fn smoothstep(x: f64) -> f64 {
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

// ∫₀^x smoothstep
fn smoothstep_integral(x: f64) -> f64 {
    x * x * x * x * (2.5 + x * (-3.0 + x))
}

/// a_ε, as a logarithm.
pub fn ln_a_eps(p: f64, eps: f64) -> f64 {
    let q = math::ln(p - 1.0) / eps;
    math::ln(eps) - math::LN_2 + if p < 2.0 { q } else { -q }
}

pub fn reg_functions(p: f64, eps: f64) -> Result<RegFunctions> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(invalid(format!("regularization needs p > 1 (got {p})")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("regularization needs 0 < ε < 1 (got {eps})")));
    }
    let ln_a = ln_a_eps(p, eps);
    let ln_eps = math::ln(eps);
    let drop = math::abs(math::ln(p - 1.0));
    let len = ln_eps - ln_a;
    let ramp = math::LN_2.min(0.5 * len);
    let height = if drop == 0.0 { 0.0 } else { drop / (eps * (len - ramp)) };
    let sign = if p < 2.0 { -1.0 } else { 1.0 };
    let cells = (math::ceil(len / (ramp / 16.0).min(0.05)) as usize).max(64);
    let dtau = len / cells as f64;
    let mut reg = RegFunctions {
        p,
        eps,
        a_eps: math::exp(ln_a),
        ln_a,
        ln_eps,
        len,
        ramp,
        height,
        sign,
        rescaled: height < 1.0 && drop > 0.0 && ramp < math::LN_2,
        dtau,
        ln_phi: Vec::new(),
        int_sphi: Vec::new(),
    };
    // ln φ backward from φ(ε) = ε^{p−2}
    let mut ln_phi = alloc::vec![0.0; cells + 1];
    ln_phi[cells] = (p - 2.0) * ln_eps;
    for k in (0..cells).rev() {
        let a = ln_a + dtau * k as f64;
        ln_phi[k] = ln_phi[k + 1] - quad::gl5(|s| reg.zeta_tau(s) - 1.0, a, a + dtau);
    }
    reg.ln_phi = ln_phi;
    let mut int = alloc::vec![0.0; cells + 1];
    int[0] = 0.5 * math::exp(reg.ln_phi[0] + 2.0 * ln_a);
    for k in 0..cells {
        let a = ln_a + dtau * k as f64;
        int[k + 1] = int[k] + reg.cell_int(k, a + dtau);
    }
    reg.int_sphi = int;
    Ok(reg)
}

impl RegFunctions {
    fn plateau(&self, y: f64) -> f64 {
        if y <= 0.0 || y >= self.len {
            0.0
        } else if y < self.ramp {
            self.height * smoothstep(y / self.ramp)
        } else if y > self.len - self.ramp {
            self.height * smoothstep((self.len - y) / self.ramp)
        } else {
            self.height
        }
    }

    fn big_g(&self, y: f64) -> f64 {
        let total = self.height * (self.len - self.ramp);
        if y <= 0.0 {
            0.0
        } else if y >= self.len {
            total
        } else if y < self.ramp {
            self.height * self.ramp * smoothstep_integral(y / self.ramp)
        } else if y > self.len - self.ramp {
            total - self.height * self.ramp * smoothstep_integral((self.len - y) / self.ramp)
        } else {
            self.height * (0.5 * self.ramp + y - self.ramp)
        }
    }

    fn zeta_tau(&self, tau: f64) -> f64 {
        if tau >= self.ln_eps {
            self.p - 1.0
        } else if tau <= self.ln_a {
            1.0
        } else {
            math::exp(self.sign * self.eps * self.big_g(tau - self.ln_a))
        }
    }

    pub fn zeta(&self, r: f64) -> f64 {
        if r >= self.eps {
            return self.p - 1.0;
        }
        if r <= 0.0 {
            return 1.0;
        }
        self.zeta_tau(math::ln(r))
    }

    /// r ζ′_ε(r).
    pub fn r_dzeta(&self, r: f64) -> f64 {
        if r <= 0.0 || r >= self.eps {
            return 0.0;
        }
        let tau = math::ln(r);
        self.zeta_tau(tau) * self.sign * self.eps * self.plateau(tau - self.ln_a)
    }

    fn cell_of(&self, tau: f64) -> usize {
        let k = math::floor((tau - self.ln_a) / self.dtau);
        (k.max(0.0) as usize).min(self.ln_phi.len() - 2)
    }

    fn ln_phi_tau(&self, tau: f64) -> f64 {
        if tau >= self.ln_eps {
            return (self.p - 2.0) * tau;
        }
        if tau <= self.ln_a {
            return self.ln_phi[0];
        }
        let k = self.cell_of(tau);
        let a = self.ln_a + self.dtau * k as f64;
        self.ln_phi[k] + quad::gl5(|s| self.zeta_tau(s) - 1.0, a, tau)
    }

    // ∫_{τ_k}^{b} e^{2τ} φ(τ) dτ with b inside cell k
    fn cell_int(&self, k: usize, b: f64) -> f64 {
        let a = self.ln_a + self.dtau * k as f64;
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let mut s = 0.0;
        for j in 0..5 {
            let tau = c + r * GL5_X[j];
            let lp = self.ln_phi[k] + quad::gl5(|q| self.zeta_tau(q) - 1.0, a, tau);
            s += GL5_W[j] * math::exp(2.0 * tau + lp);
        }
        s * r
    }

    pub fn phi(&self, r: f64) -> f64 {
        if r >= self.eps {
            return if self.p == 2.0 { 1.0 } else { math::powf(r, self.p - 2.0) };
        }
        if r <= 0.0 {
            return math::exp(self.ln_phi[0]);
        }
        math::exp(self.ln_phi_tau(math::ln(r)))
    }

    /// ∫₀^r s φ_ε(s) ds.
    pub fn int_s_phi(&self, r: f64) -> f64 {
        let n = self.int_sphi.len() - 1;
        if r <= 0.0 {
            return 0.0;
        }
        if r >= self.eps {
            return self.int_sphi[n] + (math::powf(r, self.p) - math::powf(self.eps, self.p)) / self.p;
        }
        let tau = math::ln(r);
        if tau <= self.ln_a {
            return 0.5 * math::exp(self.ln_phi[0]) * r * r;
        }
        let k = self.cell_of(tau);
        self.int_sphi[k] + self.cell_int(k, tau)
    }

    pub fn psi(&self, r: f64) -> f64 {
        let c = self.p / (self.p - 1.0);
        if r <= 0.0 {
            return 0.0;
        }
        if r >= self.eps {
            let n = self.int_sphi.len() - 1;
            let shift = math::powf(self.eps, self.p) / self.p - self.int_sphi[n];
            return math::powf(r, self.p) + c * shift;
        }
        c * (r * r * self.phi(r) - self.int_s_phi(r))
    }

    /// ψ′_ε(r) = (p/(p−1)) r φ_ε(r) ζ_ε(r).
    pub fn dpsi(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.p / (self.p - 1.0) * r * self.phi(r) * self.zeta(r)
    }

    /// Samples every invariant at `samples` log-spaced radii across and around the bridge.
    pub fn check_invariants(&self, samples: usize) -> RegCheck {
        let samples = samples.max(10);
        let lo = self.ln_a - 2.0;
        let hi = self.ln_eps + 2.0;
        let mut zeta_end: f64 = 0.0;
        let mut slope: f64 = 0.0;
        let mut phi_pow: f64 = 0.0;
        let mut ode: f64 = 0.0;
        let mut psi_err: f64 = 0.0;
        let d = 1e-4;
        for i in 0..samples {
            let tau = lo + (hi - lo) * (i as f64 + 0.5) / samples as f64;
            let r = math::exp(tau);
            let z = self.zeta_tau(tau);
            if tau <= self.ln_a {
                zeta_end = zeta_end.max(math::abs(z - 1.0));
            } else if tau >= self.ln_eps {
                zeta_end = zeta_end.max(math::abs(z - (self.p - 1.0)));
                let pw = math::powf(r, self.p - 2.0);
                phi_pow = phi_pow.max(math::abs(self.phi(r) - pw) / pw);
            } else {
                slope = slope.max(math::abs(self.r_dzeta(r)) / (self.eps * z));
            }
            let dl = (self.ln_phi_tau(tau + d) - self.ln_phi_tau(tau - d)) / (2.0 * d);
            // the centered difference straddles the kinks of ζ at a_ε and ε only within d
            if math::abs(tau - self.ln_a) > 2.0 * d && math::abs(tau - self.ln_eps) > 2.0 * d {
                ode = ode.max(math::abs(dl - (z - 1.0)));
            }
            if i % 10 == 0 && r > 0.0 && r.is_finite() {
                let independent = self.psi_by_quadrature(r);
                let scale = math::abs(independent).max(f64::MIN_POSITIVE);
                if independent.is_finite() && scale > 1e-280 {
                    psi_err = psi_err.max(math::abs(self.psi(r) - independent) / scale);
                }
            }
        }
        let pass = zeta_end <= 1e-12 && slope <= 1.0 + 1e-12 && phi_pow <= 1e-12 && ode <= 1e-6 && psi_err <= 1e-8;
        RegCheck {
            p: self.p,
            eps: self.eps,
            zeta_end_error: zeta_end,
            slope_ratio: slope,
            phi_power_error: phi_pow,
            phi_ode_error: ode,
            psi_error: psi_err,
            samples,
            pass,
        }
    }

    // ψ from its definition with the integral done by adaptive quadrature in τ.
    fn psi_by_quadrature(&self, r: f64) -> f64 {
        let tr = math::ln(r);
        let t0 = self.ln_a.max(tr - 60.0).min(tr);
        let head = 0.5 * math::exp(self.ln_phi_tau(t0) + 2.0 * t0);
        let opts = QuadOpts { rel_tol: 1e-13, max_panels: 20000, ..QuadOpts::default() };
        // split at the kinks so the adaptive rule sees smooth pieces
        let mut cuts = alloc::vec![t0];
        for c in [self.ln_a + self.ramp, self.ln_eps - self.ramp, self.ln_eps] {
            if c > t0 && c < tr {
                cuts.push(c);
            }
        }
        cuts.push(tr);
        let mut body = 0.0;
        for w in cuts.windows(2) {
            body += quad::integrate(|s| math::exp(2.0 * s + self.ln_phi_tau(s)), w[0], w[1], opts).unwrap_or(f64::NAN);
        }
        self.p / (self.p - 1.0) * (r * r * self.phi(r) - head - body)
    }
}
