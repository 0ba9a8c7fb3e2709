//! A small algebra of fields with partial derivatives, implemented twice:
//! exactly by jets and approximately by nested fourth-order finite
//! differences of closures. Identities are written once against [`Calc`].

use alloc::rc::Rc;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::jet::Jet;
use crate::math;

pub trait Calc:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    /// ∂/∂x_var; the last variable is time.
    fn d(&self, var: usize) -> Self;
    fn powf(&self, q: f64) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    /// A constant living in the same space as `self`.
    fn konst(&self, c: f64) -> Self;
    /// Value at the base point.
    fn value(&self) -> f64;
}

impl Calc for Jet {
    fn d(&self, var: usize) -> Jet {
        Jet::d(self, var)
    }
    fn powf(&self, q: f64) -> Jet {
        Jet::powf(self, q)
    }
    fn ln(&self) -> Jet {
        Jet::ln(self)
    }
    fn exp(&self) -> Jet {
        Jet::exp(self)
    }
    fn sin(&self) -> Jet {
        Jet::sin(self)
    }
    fn cos(&self) -> Jet {
        Jet::cos(self)
    }
    fn konst(&self, c: f64) -> Jet {
        self.clone() * 0.0 + c
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
}

type Func = Rc<dyn Fn(&[f64]) -> f64>;

/// A closure field differentiated by central fourth-order stencils of step h.
#[derive(Clone)]
pub struct FdField {
    f: Func,
    h: f64,
    base: Rc<Vec<f64>>,
}

impl FdField {
    pub fn new(f: impl Fn(&[f64]) -> f64 + 'static, h: f64, base: &[f64]) -> FdField {
        FdField { f: Rc::new(f), h, base: Rc::new(base.to_vec()) }
    }

    /// Coordinate function x_v.
    pub fn var(v: usize, h: f64, base: &[f64]) -> FdField {
        FdField::new(move |x: &[f64]| x[v], h, base)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn wrap(&self, f: impl Fn(&[f64]) -> f64 + 'static) -> FdField {
        FdField { f: Rc::new(f), h: self.h, base: self.base.clone() }
    }

    fn unary(&self, g: impl Fn(f64) -> f64 + 'static) -> FdField {
        let f = self.f.clone();
        self.wrap(move |x| g(f(x)))
    }

    fn binary(&self, o: &FdField, g: impl Fn(f64, f64) -> f64 + 'static) -> FdField {
        let (a, b) = (self.f.clone(), o.f.clone());
        self.wrap(move |x| g(a(x), b(x)))
    }
}

impl Calc for FdField {
    fn d(&self, var: usize) -> FdField {
        let f = self.f.clone();
        let h = self.h;
        self.wrap(move |x| {
            let mut y = x.to_vec();
            let mut at = |s: f64| {
                y[var] = x[var] + s;
                f(&y)
            };
            (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h)
        })
    }
    fn powf(&self, q: f64) -> FdField {
        if q == math::round(q) {
            self.unary(move |v| math::powi(v, q as i32))
        } else {
            self.unary(move |v| math::powf(v, q))
        }
    }
    fn ln(&self) -> FdField {
        self.unary(math::ln)
    }
    fn exp(&self) -> FdField {
        self.unary(math::exp)
    }
    fn sin(&self) -> FdField {
        self.unary(math::sin)
    }
    fn cos(&self) -> FdField {
        self.unary(math::cos)
    }
    fn konst(&self, c: f64) -> FdField {
        self.wrap(move |_| c)
    }
    fn value(&self) -> f64 {
        (self.f)(&self.base)
    }
}

macro_rules! fd_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for FdField {
            type Output = FdField;
            fn $m(self, o: FdField) -> FdField {
                self.binary(&o, |a, b| a $op b)
            }
        }
        impl $tr<f64> for FdField {
            type Output = FdField;
            fn $m(self, o: f64) -> FdField {
                self.unary(move |a| a $op o)
            }
        }
    };
}
fd_binop!(Add, add, +);
fd_binop!(Sub, sub, -);
fd_binop!(Mul, mul, *);

impl Div for FdField {
    type Output = FdField;
    fn div(self, o: FdField) -> FdField {
        self.binary(&o, |a, b| a / b)
    }
}

impl Neg for FdField {
    type Output = FdField;
    fn neg(self) -> FdField {
        self.unary(|a| -a)
    }
}

/// Euclidean gradient components ∂_0 … ∂_{n−1}.
pub fn grad<F: Calc>(u: &F, n: usize) -> Vec<F> {
    (0..n).map(|i| u.d(i)).collect()
}

pub fn dot<F: Calc>(a: &[F], b: &[F]) -> F {
    let mut s = a[0].clone() * b[0].clone();
    for i in 1..a.len() {
        s = s + a[i].clone() * b[i].clone();
    }
    s
}

/// Flat divergence of a vector field.
pub fn div<F: Calc>(x: &[F]) -> F {
    let mut s = x[0].d(0);
    for i in 1..x.len() {
        s = s + x[i].d(i);
    }
    s
}
