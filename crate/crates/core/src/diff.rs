//! Derivatives of analytic functions.
//!
//! Two tools, chosen by what the function looks like:
//!
//! * [`complex_step`] — derivative of a function that is real-analytic on
//!   the real axis, via a purely imaginary perturbation of size 1e-30.
//!   The imaginary part of the result carries `h f'(x)` exactly, with no
//!   subtractive cancellation.
//! * [`ring_derivative`] — Cauchy-integral derivative on a small circle for
//!   functions of a genuinely complex variable, where the imaginary-part
//!   trick does not apply. Truncation decays like `r^n`; roundoff grows
//!   like `eps / r`, so the default `r = 1e-2`, `n = 16` leaves roughly
//!   1e-14 relative error.

use crate::C64;

/// Step used by [`complex_step`].
pub const COMPLEX_STEP: f64 = 1e-30;

/// Derivative at a real point of a function real-valued on the real axis.
pub fn complex_step<F: Fn(C64) -> C64>(f: F, x: f64) -> C64 {
    let h = COMPLEX_STEP;
    let v = f(C64::new(x, h));
    C64::new(v.im / h, 0.0)
}

/// First derivative of an analytic `f` at complex `z` by the trapezoid rule
/// on a circle of radius `r` (exact for analytic integrands up to `r^n`).
pub fn ring_derivative<F: Fn(C64) -> C64>(f: F, z: C64, r: f64, n: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let th = 2.0 * std::f64::consts::PI * (j as f64) / (n as f64);
        let w = C64::from_polar(1.0, th);
        acc += f(z + r * w) / w;
    }
    acc / (r * n as f64)
}

/// Ring derivative of a matrix-valued function, entrywise.
pub fn ring_derivative_mat<F: Fn(C64) -> crate::linalg::Mat2>(
    f: F,
    z: C64,
    r: f64,
    n: usize,
) -> crate::linalg::Mat2 {
    let mut acc = crate::linalg::Mat2::zero();
    for j in 0..n {
        let th = 2.0 * std::f64::consts::PI * (j as f64) / (n as f64);
        let w = C64::from_polar(1.0, th);
        let v = f(z + r * w);
        for a in 0..2 {
            for b in 0..2 {
                acc.0[a][b] += v.0[a][b] / w;
            }
        }
    }
    acc.scale(C64::new(1.0 / (r * n as f64), 0.0))
}
