//! Truncated Taylor arithmetic for exact low-order derivatives of the symbol
//! profiles.
//!
//! Every scalar type here is a truncated polynomial in small increments, so
//! composition with a univariate function only needs that function's
//! derivatives at the base point.

use std::ops::{Add, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    /// Highest derivative order carried.
    const ORDER: usize;

    fn constant(c: f64) -> Self;

    fn value(&self) -> f64;

    /// `f(self)` where `derivs[k]` is the k-th derivative of `f` at
    /// `self.value()`; at least `ORDER + 1` entries are required.
    fn compose(self, derivs: &[f64]) -> Self {
        assert!(derivs.len() > Self::ORDER, "compose needs {} derivatives", Self::ORDER + 1);
        let delta = self - self.value();
        let mut out = Self::constant(derivs[0]);
        let mut power = Self::constant(1.0);
        let mut fact = 1.0;
        for (k, d) in derivs.iter().enumerate().take(Self::ORDER + 1).skip(1) {
            power = power * delta;
            fact *= k as f64;
            out = out + power * (d / fact);
        }
        out
    }

    fn recip(self) -> Self {
        let a = self.value();
        let r = 1.0 / a;
        self.compose(&[r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    fn div(self, other: Self) -> Self {
        self * other.recip()
    }

    fn exp(self) -> Self {
        let e = self.value().exp();
        self.compose(&[e, e, e, e])
    }

    fn ln(self) -> Self {
        let a = self.value();
        let r = 1.0 / a;
        self.compose(&[a.ln(), r, -r * r, 2.0 * r * r * r])
    }

    fn sqrt(self) -> Self {
        let a = self.value();
        let s = a.sqrt();
        self.compose(&[s, 0.5 / s, -0.25 / (s * a), 0.375 / (s * a * a)])
    }
}

impl Scalar for f64 {
    const ORDER: usize = 0;

    fn constant(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn compose(self, derivs: &[f64]) -> Self {
        derivs[0]
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn div(self, other: Self) -> Self {
        self / other
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

/// Univariate Taylor polynomial through third order; `c[k] = f^(k)/k!`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor1(pub [f64; 4]);

impl Taylor1 {
    pub fn variable(x: f64) -> Self {
        Self([x, 1.0, 0.0, 0.0])
    }

    /// k-th derivative at the base point.
    pub fn derivative(&self, k: usize) -> f64 {
        const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];
        self.0[k] * FACT[k]
    }
}

impl Add for Taylor1 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }
}
impl Sub for Taylor1 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }
}
impl Mul for Taylor1 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (self.0, o.0);
        Self([
            a[0] * b[0],
            a[0] * b[1] + a[1] * b[0],
            a[0] * b[2] + a[1] * b[1] + a[2] * b[0],
            a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0],
        ])
    }
}
impl Neg for Taylor1 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|c| -c))
    }
}
impl Add<f64> for Taylor1 {
    type Output = Self;
    fn add(mut self, c: f64) -> Self {
        self.0[0] += c;
        self
    }
}
impl Sub<f64> for Taylor1 {
    type Output = Self;
    fn sub(mut self, c: f64) -> Self {
        self.0[0] -= c;
        self
    }
}
impl Mul<f64> for Taylor1 {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Self(self.0.map(|x| x * c))
    }
}

impl Scalar for Taylor1 {
    const ORDER: usize = 3;

    fn constant(c: f64) -> Self {
        Self([c, 0.0, 0.0, 0.0])
    }
    fn value(&self) -> f64 {
        self.0[0]
    }
}

/// Second-order jet in two variables (u, v):
/// `f ≈ v0 + u1·du + v1·dv + uu·du² + uv·du·dv + vv·dv²`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet2 {
    pub v0: f64,
    pub u1: f64,
    pub v1: f64,
    pub uu: f64,
    pub uv: f64,
    pub vv: f64,
}

impl Jet2 {
    pub fn var_u(u: f64) -> Self {
        Self { v0: u, u1: 1.0, ..Self::default() }
    }
    pub fn var_v(v: f64) -> Self {
        Self { v0: v, v1: 1.0, ..Self::default() }
    }
    pub fn d_u(&self) -> f64 {
        self.u1
    }
    pub fn d_v(&self) -> f64 {
        self.v1
    }
    pub fn d_uu(&self) -> f64 {
        2.0 * self.uu
    }
    pub fn d_uv(&self) -> f64 {
        self.uv
    }
    pub fn d_vv(&self) -> f64 {
        2.0 * self.vv
    }
}

impl Add for Jet2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v0: self.v0 + o.v0,
            u1: self.u1 + o.u1,
            v1: self.v1 + o.v1,
            uu: self.uu + o.uu,
            uv: self.uv + o.uv,
            vv: self.vv + o.vv,
        }
    }
}
impl Sub for Jet2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}
impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}
impl Mul for Jet2 {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let a = self;
        Self {
            v0: a.v0 * b.v0,
            u1: a.v0 * b.u1 + a.u1 * b.v0,
            v1: a.v0 * b.v1 + a.v1 * b.v0,
            uu: a.v0 * b.uu + a.u1 * b.u1 + a.uu * b.v0,
            uv: a.v0 * b.uv + a.u1 * b.v1 + a.v1 * b.u1 + a.uv * b.v0,
            vv: a.v0 * b.vv + a.v1 * b.v1 + a.vv * b.v0,
        }
    }
}
impl Add<f64> for Jet2 {
    type Output = Self;
    fn add(mut self, c: f64) -> Self {
        self.v0 += c;
        self
    }
}
impl Sub<f64> for Jet2 {
    type Output = Self;
    fn sub(mut self, c: f64) -> Self {
        self.v0 -= c;
        self
    }
}
impl Mul<f64> for Jet2 {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Self {
            v0: self.v0 * c,
            u1: self.u1 * c,
            v1: self.v1 * c,
            uu: self.uu * c,
            uv: self.uv * c,
            vv: self.vv * c,
        }
    }
}

impl Scalar for Jet2 {
    const ORDER: usize = 2;

    fn constant(c: f64) -> Self {
        Self { v0: c, ..Self::default() }
    }
    fn value(&self) -> f64 {
        self.v0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_derivatives_of_exp_sin_like_composition() {
        // f(x) = exp(x^2), f' = 2x f, f'' = (2 + 4x^2) f, f''' = (12x + 8x^3) f
        let x = 0.7;
        let t = Taylor1::variable(x);
        let f = (t * t).exp();
        let e = (x * x).exp();
        assert!((f.derivative(0) - e).abs() < 1e-14);
        assert!((f.derivative(1) - 2.0 * x * e).abs() < 1e-13);
        assert!((f.derivative(2) - (2.0 + 4.0 * x * x) * e).abs() < 1e-13);
        assert!((f.derivative(3) - (12.0 * x + 8.0 * x.powi(3)) * e).abs() < 1e-12);
    }

    #[test]
    fn jet_partials_of_radius() {
        let (u, v) = (3.0, 4.0);
        let r = (Jet2::var_u(u) * Jet2::var_u(u) + Jet2::var_v(v) * Jet2::var_v(v)).sqrt();
        assert!((r.value() - 5.0).abs() < 1e-15);
        assert!((r.d_u() - 0.6).abs() < 1e-15);
        assert!((r.d_v() - 0.8).abs() < 1e-15);
        // r_uu = v^2/r^3, r_uv = -uv/r^3
        assert!((r.d_uu() - 16.0 / 125.0).abs() < 1e-15);
        assert!((r.d_uv() + 12.0 / 125.0).abs() < 1e-15);
        assert!((r.d_vv() - 9.0 / 125.0).abs() < 1e-15);
    }

    #[test]
    fn division_and_log() {
        let (u, v) = (2.0, 0.5);
        let q = Jet2::var_u(u).div(Jet2::var_v(v)).ln();
        assert!((q.value() - 4f64.ln()).abs() < 1e-15);
        assert!((q.d_u() - 0.5).abs() < 1e-15);
        assert!((q.d_v() + 2.0).abs() < 1e-15);
        assert!((q.d_uu() + 0.25).abs() < 1e-15);
        assert!((q.d_vv() - 4.0).abs() < 1e-14);
        assert!(q.d_uv().abs() < 1e-15);
    }
}
