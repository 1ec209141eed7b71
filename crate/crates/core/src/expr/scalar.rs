//! Forward-mode dual numbers. Nesting `Dual<Dual<Dual<f64>>>` carries
//! exact mixed partials up to third order.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Real-like arithmetic shared by `f64` and (nested) dual numbers.
pub trait Scalar:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Innermost real part.
    fn re(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;

    fn abs(self) -> Self {
        if self.re() < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Integer power by repeated squaring; no domain restriction for k >= 0.
    fn powi(self, k: i64) -> Self {
        let mut base = self;
        let mut e = k.unsigned_abs();
        let mut acc = Self::cst(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        if k < 0 {
            Self::cst(1.0) / acc
        } else {
            acc
        }
    }

    /// Real power for a positive base.
    fn powf(self, p: Self) -> Self {
        (p * self.ln()).exp()
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    fn chain(self, f: T, df: T) -> Self {
        Self {
            re: f,
            eps: df * self.eps,
        }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = T::cst(1.0) / o.re;
        Self::new(self.re * inv, (self.eps - self.re * inv * o.eps) * inv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn cst(v: f64) -> Self {
        Self::new(T::cst(v), T::cst(0.0))
    }
    fn re(&self) -> f64 {
        self.re.re()
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn tan(self) -> Self {
        let t = self.re.tan();
        self.chain(t, T::cst(1.0) + t * t)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::cst(1.0) / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::cst(0.5) / s)
    }
}

pub type D1 = Dual<f64>;
pub type D2 = Dual<D1>;
pub type D3 = Dual<D2>;

/// Seed a third-order nested dual for coordinate `m` with perturbation
/// directions `(a, b, c)` on the outer, middle and inner levels.
pub fn seed3(value: f64, m: usize, a: usize, b: usize, c: usize) -> D3 {
    let ind = |d: usize| if d == m { 1.0 } else { 0.0 };
    let inner = D1::new(value, ind(c));
    let middle = D2::new(inner, D1::new(ind(b), 0.0));
    let outer_eps = D2::new(D1::new(ind(a), 0.0), D1::new(0.0, 0.0));
    D3::new(middle, outer_eps)
}

pub fn seed2(value: f64, m: usize, a: usize, b: usize) -> D2 {
    let ind = |d: usize| if d == m { 1.0 } else { 0.0 };
    D2::new(D1::new(value, ind(b)), D1::new(ind(a), 0.0))
}

pub fn seed1(value: f64, m: usize, a: usize) -> D1 {
    D1::new(value, if a == m { 1.0 } else { 0.0 })
}
