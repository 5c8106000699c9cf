//! Forward-mode automatic differentiation.
//!
//! Every form and field in the model catalog is written once, generically over
//! [`Real`], and evaluated either on plain `f64` or on [`Dual`] numbers. Nesting
//! duals (`Dual<Dual<f64, N>, N>`) yields exact second derivatives, which is what
//! the Reeb-field Jacobian needs (the field already contains one derivative of
//! the contact form).

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Maximum chart dimension supported by the differentiation machinery.
pub const MAXD: usize = 4;

pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    /// Four-quadrant arctangent of `self / x`.
    fn atan2(self, x: Self) -> Self;

    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
    fn powi(self, n: i32) -> Self {
        let mut acc = Self::cst(1.0);
        let base = if n < 0 { self.recip() } else { self };
        for _ in 0..n.unsigned_abs() {
            acc *= base;
        }
        acc
    }
    fn scale(self, c: f64) -> Self {
        self * Self::cst(c)
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
}

/// A value together with its first derivatives along `N` seed directions.
#[derive(Clone, Copy, Debug)]
pub struct Dual<S: Real, const N: usize> {
    pub re: S,
    pub eps: [S; N],
}

impl<S: Real, const N: usize> Dual<S, N> {
    pub fn constant(re: S) -> Self {
        Self { re, eps: [S::cst(0.0); N] }
    }

    pub fn variable(re: S, slot: usize) -> Self {
        let mut eps = [S::cst(0.0); N];
        eps[slot] = S::cst(1.0);
        Self { re, eps }
    }

    /// Chain rule for a scalar function with value `f` and derivative `df` at `re`.
    fn chain(self, f: S, df: S) -> Self {
        let mut eps = self.eps;
        for e in eps.iter_mut() {
            *e = *e * df;
        }
        Self { re: f, eps }
    }
}

impl<S: Real, const N: usize> Add for Dual<S, N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.re += rhs.re;
        for i in 0..N {
            self.eps[i] += rhs.eps[i];
        }
        self
    }
}

impl<S: Real, const N: usize> Sub for Dual<S, N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.re -= rhs.re;
        for i in 0..N {
            self.eps[i] -= rhs.eps[i];
        }
        self
    }
}

impl<S: Real, const N: usize> Mul for Dual<S, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut eps = [S::cst(0.0); N];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = self.re * rhs.eps[i] + self.eps[i] * rhs.re;
        }
        Self { re: self.re * rhs.re, eps }
    }
}

impl<S: Real, const N: usize> Div for Dual<S, N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = rhs.re.recip();
        let re = self.re * inv;
        let mut eps = [S::cst(0.0); N];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = (self.eps[i] - re * rhs.eps[i]) * inv;
        }
        Self { re, eps }
    }
}

impl<S: Real, const N: usize> Neg for Dual<S, N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.re = -self.re;
        for e in self.eps.iter_mut() {
            *e = -*e;
        }
        self
    }
}

impl<S: Real, const N: usize> AddAssign for Dual<S, N> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<S: Real, const N: usize> SubAssign for Dual<S, N> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<S: Real, const N: usize> MulAssign for Dual<S, N> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<S: Real, const N: usize> Real for Dual<S, N> {
    fn cst(v: f64) -> Self {
        Self::constant(S::cst(v))
    }
    fn value(&self) -> f64 {
        self.re.value()
    }
    fn sin(self) -> Self {
        let (s, c) = self.re.sin_cos();
        self.chain(s, c)
    }
    fn cos(self) -> Self {
        let (s, c) = self.re.sin_cos();
        self.chain(c, -s)
    }
    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = self.re.sin_cos();
        (self.chain(s, c), self.chain(c, -s))
    }
    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        self.chain(r, (r + r).recip())
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), self.re.recip())
    }
    fn atan2(self, x: Self) -> Self {
        let r2 = (self.re * self.re + x.re * x.re).recip();
        let mut eps = [S::cst(0.0); N];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = (x.re * self.eps[i] - self.re * x.eps[i]) * r2;
        }
        Self { re: self.re.atan2(x.re), eps }
    }
    fn scale(mut self, c: f64) -> Self {
        self.re = self.re.scale(c);
        for e in self.eps.iter_mut() {
            *e = e.scale(c);
        }
        self
    }
}

pub type D1 = Dual<f64, MAXD>;
pub type D2 = Dual<D1, MAXD>;

/// Seeds a point so that the result carries derivatives with respect to every coordinate.
pub fn seed<S: Real>(p: &[S]) -> Vec<Dual<S, MAXD>> {
    assert!(p.len() <= MAXD, "chart dimension {} exceeds {}", p.len(), MAXD);
    p.iter()
        .enumerate()
        .map(|(i, &x)| Dual::variable(x, i))
        .collect()
}

pub fn values<S: Real>(v: &[Dual<S, MAXD>]) -> Vec<S> {
    v.iter().map(|d| d.re).collect()
}

/// `jac[i][j] = d v_i / d p_j` for the first `dim` coordinates.
pub fn jacobian<S: Real>(v: &[Dual<S, MAXD>], dim: usize) -> Vec<Vec<S>> {
    v.iter().map(|d| d.eps[..dim].to_vec()).collect()
}

pub fn lift<S: Real>(p: &[f64]) -> Vec<S> {
    p.iter().map(|&x| S::cst(x)).collect()
}
