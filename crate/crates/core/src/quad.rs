//! Composite Gauss-Legendre quadrature on [0, 1] with panel doubling.
//!
//! The integrands here are restrictions of analytic functions to the
//! contour, so the composite rule converges geometrically; doubling stops
//! once two successive refinements agree to the requested tolerance.

use crate::error::{EopError, Result};
use crate::C64;
use std::sync::OnceLock;

/// Nodes per panel.
pub const NODES_PER_PANEL: usize = 32;

/// Hard ceiling on total nodes before giving up.
pub const MAX_TOTAL_NODES: usize = 1 << 14;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre polynomial.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=(n + 1) / 2 {
        // Tricomi-style initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        out.push((-x, w));
    }
    // Mirror to the full set.
    let mut full: Vec<(f64, f64)> = out.clone();
    for &(x, w) in out.iter().rev() {
        if x.abs() > 1e-15 {
            full.push((-x, w));
        }
    }
    full.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    full
}

fn gl32() -> &'static [(f64, f64)] {
    static CACHE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CACHE.get_or_init(|| gauss_legendre(NODES_PER_PANEL))
}

/// Composite estimate with `panels` equal panels over [0, 1].
/// Also returns the L1 mass used for the zero-integral scale.
fn composite<F: Fn(f64) -> C64>(f: &F, panels: usize) -> (C64, f64) {
    let nodes = gl32();
    let width = 1.0 / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    let mut mass = 0.0;
    for p in 0..panels {
        let left = p as f64 * width;
        for &(x, w) in nodes {
            let s = left + (x + 1.0) * 0.5 * width;
            let v = f(s);
            let ww = w * 0.5 * width;
            acc += ww * v;
            mass += ww * v.norm();
        }
    }
    (acc, mass)
}

/// Integrate `f` over [0, 1] with panel doubling until two successive
/// refinements differ by less than `tol` relative to the estimate (or to a
/// small multiple of the L1 mass, so integrals that vanish identically can
/// converge too). Returns the finer estimate.
pub fn integrate_01<F: Fn(f64) -> C64>(f: F, tol: f64) -> Result<C64> {
    if tol < 1e-14 {
        return Err(EopError::InvalidInput(format!(
            "quadrature tolerance {tol} below representable accuracy"
        )));
    }
    let mut panels = 2;
    let (mut coarse, _) = composite(&f, panels);
    loop {
        panels *= 2;
        if panels * NODES_PER_PANEL > MAX_TOTAL_NODES {
            return Err(EopError::NonConvergent {
                what: "contour quadrature",
            });
        }
        let (fine, mass) = composite(&f, panels);
        let scale = fine.norm().max(1e-2 * mass).max(1e-300);
        if (fine - coarse).norm() < tol * scale {
            return Ok(fine);
        }
        coarse = fine;
    }
}
