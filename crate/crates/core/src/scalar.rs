//! Scalar abstraction: plain complex numbers or second-order jets.
//!
//! A [`Jet`] carries a value together with exact first and second
//! derivatives with respect to one parameter. Running an analytic
//! computation on jets is the cancellation-free equivalent of complex-step
//! differentiation: the derivative components propagate through every
//! arithmetic operation by the chain rule instead of being recovered from a
//! finite difference. The parameter pipelines (complete elliptic integrals,
//! lattice scalars, moment recursion, Hankel determinants) are generic over
//! [`CScalar`] so the same code path produces values and t-derivatives.

use crate::C64;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait CScalar:
    Copy
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_c64(c: C64) -> Self;
    fn value(&self) -> C64;
    fn sqrt(self) -> Self;
    fn powf(self, e: f64) -> Self;

    fn from_f64(x: f64) -> Self {
        Self::from_c64(C64::new(x, 0.0))
    }

    fn norm(&self) -> f64 {
        self.value().norm()
    }

    fn scale(self, x: f64) -> Self {
        self * Self::from_f64(x)
    }

    /// Integer power by repeated multiplication; exponents here are small.
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::from_f64(1.0);
        }
        let (mut base, mut e) = if n < 0 {
            (Self::from_f64(1.0) / self, (-n) as u32)
        } else {
            (self, n as u32)
        };
        let mut acc = Self::from_f64(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl CScalar for C64 {
    fn from_c64(c: C64) -> Self {
        c
    }
    fn value(&self) -> C64 {
        *self
    }
    fn sqrt(self) -> Self {
        num_complex::Complex::sqrt(self)
    }
    fn powf(self, e: f64) -> Self {
        num_complex::Complex::powf(self, e)
    }
}

/// Value with exact first and second derivative in one parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub f: C64,
    pub d1: C64,
    pub d2: C64,
}

impl Jet {
    pub const fn new(f: C64, d1: C64, d2: C64) -> Self {
        Jet { f, d1, d2 }
    }

    /// Seed for the differentiation variable itself.
    pub fn var(t: C64) -> Self {
        Jet::new(t, C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Jet::new(c, C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    }

    fn recip(self) -> Self {
        let g = 1.0 / self.f;
        let g2 = g * g;
        Jet::new(
            g,
            -self.d1 * g2,
            (2.0 * self.d1 * self.d1 * g - self.d2) * g2,
        )
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.f + o.f, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.f - o.f, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.f * o.f,
            self.f * o.d1 + self.d1 * o.f,
            self.f * o.d2 + 2.0 * self.d1 * o.d1 + self.d2 * o.f,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.f, -self.d1, -self.d2)
    }
}

impl CScalar for Jet {
    fn from_c64(c: C64) -> Self {
        Jet::constant(c)
    }

    fn value(&self) -> C64 {
        self.f
    }

    fn sqrt(self) -> Self {
        let s = self.f.sqrt();
        let d1 = self.d1 / (2.0 * s);
        let d2 = self.d2 / (2.0 * s) - self.d1 * self.d1 / (4.0 * s * s * s);
        Jet::new(s, d1, d2)
    }

    fn powf(self, e: f64) -> Self {
        let g = self.f.powf(e);
        let gm1 = self.f.powf(e - 1.0);
        let gm2 = self.f.powf(e - 2.0);
        Jet::new(
            g,
            e * gm1 * self.d1,
            e * gm1 * self.d2 + e * (e - 1.0) * gm2 * self.d1 * self.d1,
        )
    }
}

/// Value with exact first, second and third derivatives in one parameter.
/// Used where a difference stencil on noisy first derivatives would lose
/// the target accuracy (second derivatives of badly cancelled Hankel
/// determinants near the ends of the t-interval).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet3 {
    pub f: C64,
    pub d1: C64,
    pub d2: C64,
    pub d3: C64,
}

impl Jet3 {
    pub const fn new(f: C64, d1: C64, d2: C64, d3: C64) -> Self {
        Jet3 { f, d1, d2, d3 }
    }

    pub fn var(t: C64) -> Self {
        let zero = C64::new(0.0, 0.0);
        Jet3::new(t, C64::new(1.0, 0.0), zero, zero)
    }

    pub fn constant(c: C64) -> Self {
        let zero = C64::new(0.0, 0.0);
        Jet3::new(c, zero, zero, zero)
    }

    fn recip(self) -> Self {
        let h = 1.0 / self.f;
        let h1 = -self.d1 * h * h;
        let h2 = -self.d2 * h * h - 2.0 * self.d1 * h * h1;
        let h3 = -self.d3 * h * h - 4.0 * self.d2 * h * h1 - 2.0 * self.d1 * (h1 * h1 + h * h2);
        Jet3::new(h, h1, h2, h3)
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, o: Jet3) -> Jet3 {
        Jet3::new(self.f + o.f, self.d1 + o.d1, self.d2 + o.d2, self.d3 + o.d3)
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, o: Jet3) -> Jet3 {
        Jet3::new(self.f - o.f, self.d1 - o.d1, self.d2 - o.d2, self.d3 - o.d3)
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, o: Jet3) -> Jet3 {
        Jet3::new(
            self.f * o.f,
            self.d1 * o.f + self.f * o.d1,
            self.d2 * o.f + 2.0 * self.d1 * o.d1 + self.f * o.d2,
            self.d3 * o.f + 3.0 * self.d2 * o.d1 + 3.0 * self.d1 * o.d2 + self.f * o.d3,
        )
    }
}

impl Div for Jet3 {
    type Output = Jet3;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet3) -> Jet3 {
        self * o.recip()
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        Jet3::new(-self.f, -self.d1, -self.d2, -self.d3)
    }
}

impl CScalar for Jet3 {
    fn from_c64(c: C64) -> Self {
        Jet3::constant(c)
    }

    fn value(&self) -> C64 {
        self.f
    }

    fn sqrt(self) -> Self {
        let s = self.f.sqrt();
        let s1 = self.d1 / (2.0 * s);
        let s2 = (self.d2 - 2.0 * s1 * s1) / (2.0 * s);
        let s3 = (self.d3 - 6.0 * s1 * s2) / (2.0 * s);
        Jet3::new(s, s1, s2, s3)
    }

    fn powf(self, e: f64) -> Self {
        let g = self.f.powf(e);
        let gm1 = self.f.powf(e - 1.0);
        let gm2 = self.f.powf(e - 2.0);
        let gm3 = self.f.powf(e - 3.0);
        let d1 = e * gm1 * self.d1;
        let d2 = e * gm1 * self.d2 + e * (e - 1.0) * gm2 * self.d1 * self.d1;
        let d3 = e * gm1 * self.d3
            + 3.0 * e * (e - 1.0) * gm2 * self.d1 * self.d2
            + e * (e - 1.0) * (e - 2.0) * gm3 * self.d1 * self.d1 * self.d1;
        Jet3::new(g, d1, d2, d3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
    }

    #[test]
    fn jet_matches_closed_derivatives() {
        // f(t) = t^3 / sqrt(1 + t): check against hand derivatives at t = 0.7
        let t = 0.7;
        let x = Jet::var(C64::new(t, 0.0));
        let one = Jet::constant(C64::new(1.0, 0.0));
        let f = x * x * x / (one + x).sqrt();

        let g = |t: f64| t.powi(3) / (1.0 + t).sqrt();
        let h = 1e-5;
        let d1 = (g(t + h) - g(t - h)) / (2.0 * h);
        let d2 = (g(t + h) - 2.0 * g(t) + g(t - h)) / (h * h);
        assert!(close(f.d1, C64::new(d1, 0.0), 1e-9));
        assert!(close(f.d2, C64::new(d2, 0.0), 1e-5));
    }

    #[test]
    fn jet_powi_and_powf_agree() {
        let x = Jet::var(C64::new(1.3, 0.2));
        let a = x.powi(5);
        let b = x.powf(5.0);
        assert!(close(a.f, b.f, 1e-14));
        assert!(close(a.d1, b.d1, 1e-14));
        assert!(close(a.d2, b.d2, 1e-13));
    }

    #[test]
    fn jet3_matches_closed_derivatives() {
        // f(t) = sqrt(t) / (1 + t^2): closed derivatives at t = 0.8
        let t = 0.8f64;
        let x = Jet3::var(C64::new(t, 0.0));
        let one = Jet3::constant(C64::new(1.0, 0.0));
        let f = x.sqrt() / (one + x * x);
        let g = |t: f64| t.sqrt() / (1.0 + t * t);
        let h = 1e-4;
        let d1 = (g(t + h) - g(t - h)) / (2.0 * h);
        let d2 = (g(t + h) - 2.0 * g(t) + g(t - h)) / (h * h);
        let d3 =
            (g(t + 2.0 * h) - 2.0 * g(t + h) + 2.0 * g(t - h) - g(t - 2.0 * h)) / (2.0 * h * h * h);
        assert!(close(f.d1, C64::new(d1, 0.0), 1e-7));
        assert!(close(f.d2, C64::new(d2, 0.0), 1e-6));
        assert!(close(f.d3, C64::new(d3, 0.0), 1e-4));
        // powf third derivative against powi on integer exponents
        let a = x.powi(4);
        let b = x.powf(4.0);
        assert!(close(a.d3, b.d3, 1e-12));
    }
}
