//! Multivariate truncated Taylor series ("jets") for exact derivatives of
//! closed-form fields. A jet stores the Taylor coefficients f^{(α)}/α! of a
//! function about a base point for all multi-indices |α| ≤ D.

use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::math;

/// Monomial bookkeeping shared by every jet of one (variables, degree) shape.
#[derive(Debug)]
pub struct JetSpace {
    pub nv: usize,
    pub deg: usize,
    degs: Vec<usize>,
    // (i, j, k): mono_i · mono_j = mono_k
    mul: Vec<(u32, u32, u32)>,
    // per variable: (target, source, factor) for ∂_v
    diff: Vec<Vec<(u32, u32, f64)>>,
    // first-degree monomial of each variable
    unit: Vec<usize>,
}

impl JetSpace {
    pub fn new(nv: usize, deg: usize) -> Rc<JetSpace> {
        let mut monos: Vec<Vec<u8>> = Vec::new();
        for d in 0..=deg {
            let mut cur = vec![0u8; nv];
            enumerate(nv, d, 0, &mut cur, &mut monos);
        }
        let index: BTreeMap<Vec<u8>, usize> = monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let degs: Vec<usize> = monos.iter().map(|m| m.iter().map(|&e| e as usize).sum()).collect();
        let mut mul = Vec::new();
        for i in 0..monos.len() {
            for j in 0..monos.len() {
                if degs[i] + degs[j] <= deg {
                    let s: Vec<u8> = monos[i].iter().zip(&monos[j]).map(|(a, b)| a + b).collect();
                    mul.push((i as u32, j as u32, index[&s] as u32));
                }
            }
        }
        let mut diff = Vec::with_capacity(nv);
        let mut unit = Vec::with_capacity(nv);
        for v in 0..nv {
            let mut tab = Vec::new();
            for (t, m) in monos.iter().enumerate() {
                if degs[t] < deg {
                    let mut s = m.clone();
                    s[v] += 1;
                    tab.push((t as u32, index[&s] as u32, s[v] as f64));
                }
            }
            diff.push(tab);
            let mut e = vec![0u8; nv];
            e[v] = 1;
            unit.push(index[&e]);
        }
        Rc::new(JetSpace { nv, deg, degs, mul, diff, unit })
    }

    pub fn len(&self) -> usize {
        self.degs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degs.is_empty()
    }
}

fn enumerate(nv: usize, left: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if pos == nv - 1 {
        cur[pos] = left as u8;
        out.push(cur.clone());
        return;
    }
    for e in (0..=left).rev() {
        cur[pos] = e as u8;
        enumerate(nv, left - e, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// A truncated Taylor polynomial. `valid` is the degree up to which the
/// coefficients are trustworthy after differentiation.
#[derive(Debug, Clone)]
pub struct Jet {
    sp: Rc<JetSpace>,
    c: Vec<f64>,
    valid: i32,
}

impl Jet {
    pub fn constant(sp: &Rc<JetSpace>, v: f64) -> Jet {
        let mut c = vec![0.0; sp.len()];
        c[0] = v;
        Jet { sp: sp.clone(), c, valid: sp.deg as i32 }
    }

    /// The coordinate function x_v with base value x0.
    pub fn var(sp: &Rc<JetSpace>, v: usize, x0: f64) -> Jet {
        let mut j = Jet::constant(sp, x0);
        j.c[sp.unit[v]] = 1.0;
        j
    }

    pub fn value(&self) -> f64 {
        assert!(self.valid >= 0, "jet differentiated past its degree");
        self.c[0]
    }

    pub fn valid(&self) -> i32 {
        self.valid
    }

    /// Coefficient of the first-degree monomial in variable v (= ∂_v at the base point).
    pub fn first(&self, v: usize) -> f64 {
        self.c[self.sp.unit[v]]
    }

    fn lowest_degree(&self) -> i32 {
        for (k, &d) in self.sp.degs.iter().enumerate() {
            if d as i32 > self.valid {
                break;
            }
            if self.c[k] != 0.0 {
                return d as i32;
            }
        }
        self.valid + 1
    }

    pub fn d(&self, v: usize) -> Jet {
        let mut c = vec![0.0; self.c.len()];
        for &(t, s, f) in self.sp.diff[v].iter() {
            c[t as usize] = f * self.c[s as usize];
        }
        Jet { sp: self.sp.clone(), c, valid: self.valid - 1 }
    }

    fn mul_jet(&self, o: &Jet) -> Jet {
        let mut c = vec![0.0; self.c.len()];
        for &(i, j, k) in self.sp.mul.iter() {
            let a = self.c[i as usize];
            if a != 0.0 {
                c[k as usize] += a * o.c[j as usize];
            }
        }
        let valid = (self.valid + o.lowest_degree()).min(o.valid + self.lowest_degree());
        Jet { sp: self.sp.clone(), c, valid: valid.min(self.sp.deg as i32) }
    }

    /// f(self) given f^{(k)}(a0) for k = 0..=deg.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let mut delta = self.clone();
        delta.c[0] = 0.0;
        let mut out = Jet::constant(&self.sp, derivs[0]);
        out.valid = self.valid;
        let mut pow = Jet::constant(&self.sp, 1.0);
        let mut fact = 1.0;
        let top = self.valid.max(0) as usize;
        for k in 1..=top.min(self.sp.deg) {
            pow = pow.mul_jet(&delta);
            fact *= k as f64;
            let w = derivs[k] / fact;
            for i in 0..out.c.len() {
                out.c[i] += w * pow.c[i];
            }
        }
        out
    }

    fn order(&self) -> usize {
        self.sp.deg
    }

    pub fn exp(&self) -> Jet {
        let e = math::exp(self.c[0]);
        self.compose(&vec![e; self.order() + 1])
    }

    pub fn ln(&self) -> Jet {
        let x = self.c[0];
        let mut d = vec![math::ln(x)];
        let mut f = 1.0;
        for k in 1..=self.order() {
            // (−1)^{k−1}(k−1)!/x^k
            d.push(f / math::powi(x, k as i32));
            f *= -(k as f64);
        }
        self.compose(&d)
    }

    pub fn powf(&self, q: f64) -> Jet {
        let x = self.c[0];
        let integer = q == math::round(q);
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut coef = 1.0;
        for k in 0..=self.order() {
            let e = q - k as f64;
            let base = if integer { math::powi(x, e as i32) } else { math::powf(x, e) };
            d.push(if coef == 0.0 { 0.0 } else { coef * base });
            coef *= e;
        }
        self.compose(&d)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = (math::sin(self.c[0]), math::cos(self.c[0]));
        let cyc = [s, c, -s, -c];
        self.compose(&(0..=self.order()).map(|k| cyc[k % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = (math::sin(self.c[0]), math::cos(self.c[0]));
        let cyc = [c, -s, -c, s];
        self.compose(&(0..=self.order()).map(|k| cyc[k % 4]).collect::<Vec<_>>())
    }

    pub fn recip(&self) -> Jet {
        self.powf(-1.0)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { sp: self.sp.clone(), c: self.c.iter().map(|x| x * s).collect(), valid: self.valid }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a += b;
        }
        self.valid = self.valid.min(o.valid);
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, o: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a -= b;
        }
        self.valid = self.valid.min(o.valid);
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        self.mul_jet(&o)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self.mul_jet(&o.recip())
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, o: f64) -> Jet {
        self.c[0] += o;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, o: f64) -> Jet {
        self.c[0] -= o;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        self.scale(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_product_and_exp() {
        let sp = JetSpace::new(2, 5);
        let x = Jet::var(&sp, 0, 0.7);
        let y = Jet::var(&sp, 1, -0.3);
        // f = e^{xy} sin x
        let f = (x.clone() * y.clone()).exp() * x.sin();
        let fx = f.d(0);
        let exact_fx = (0.7f64 * -0.3).exp() * (-0.3 * 0.7f64.sin() + 0.7f64.cos());
        assert!((fx.value() - exact_fx).abs() < 1e-14);
        let fxy = f.d(0).d(1);
        // ∂y of e^{xy}(y sin x + cos x) = e^{xy}(x(y sin x + cos x) + sin x)
        let e = (0.7f64 * -0.3).exp();
        let exact = e * (0.7 * (-0.3 * 0.7f64.sin() + 0.7f64.cos()) + 0.7f64.sin());
        assert!((fxy.value() - exact).abs() < 1e-13);
    }

    #[test]
    fn powers_and_logs() {
        let sp = JetSpace::new(1, 6);
        let x = Jet::var(&sp, 0, 2.0);
        let g = x.powf(1.5).ln() * 2.0; // 3 ln x
        let g3 = g.d(0).d(0).d(0).value();
        assert!((g3 - 3.0 * 2.0 / 8.0).abs() < 1e-13);
        let q = x.clone() / (x.clone() * x.clone() + 1.0);
        let qd = q.d(0).value();
        assert!((qd - (1.0 - 4.0) / 25.0).abs() < 1e-14);
    }

    #[test]
    #[should_panic]
    fn over_differentiation_is_caught() {
        let sp = JetSpace::new(1, 2);
        let x = Jet::var(&sp, 0, 1.0);
        let _ = x.exp().d(0).d(0).d(0).value();
    }
}
