//! Monic elliptic polynomials, their Cauchy transforms, and the 2x2
//! boundary-value matrices built from consecutive polynomials.
//!
//! Basis: `E_0 = 1`, `E_{2k} = wp^k`, `E_{2k+3} = -wp' wp^k / 2`; there is
//! no degree-one element. The degree-n polynomial is the monic combination
//! orthogonal to every lower basis element, obtained by solving the
//! checkerboard moment system `S_n c = -(mu_{n,0}, ..., mu_{n,n-1})`.
//!
//! The Cauchy transforms use the torus kernel `C(w, z) = zeta(w-z) - zeta(w)`,
//! which has residue 1 at `w = z` and -1 at `w = 0`; the transform of a
//! polynomial of degree >= 2 is doubly periodic off the contour.

use crate::elliptic::LatticeData;
use crate::error::{EopError, Result};
use crate::hankel::{self, DetValue};
use crate::linalg::{lu_solve, Mat2};
use crate::moments::{contour_quadrature, MomentTable};
use crate::C64;
use std::collections::BTreeMap;

/// Minimum distance from the contour for Cauchy-transform evaluation.
pub const CONTOUR_MARGIN: f64 = 1e-3;

/// Coefficients of a monic elliptic polynomial in the basis above.
#[derive(Clone, Debug)]
pub struct EllipticPolynomial {
    pub degree: usize,
    /// basis index -> coefficient; the leading index carries exactly 1.
    pub coeffs: BTreeMap<usize, C64>,
}

/// Value of one basis element given `wp` and `wp'` at the point.
pub fn basis_value(index: usize, wp: C64, wp_prime: C64) -> C64 {
    if index % 2 == 0 {
        wp.powu((index / 2) as u32)
    } else {
        -0.5 * wp_prime * wp.powu(((index - 3) / 2) as u32)
    }
}

impl EllipticPolynomial {
    pub fn eval(&self, z: C64, lat: &LatticeData) -> Result<C64> {
        let v = lat.weierstrass(z)?;
        let mut acc = C64::new(0.0, 0.0);
        for (&i, &c) in &self.coeffs {
            acc += c * basis_value(i, v.wp, v.wp_prime);
        }
        Ok(acc)
    }

    /// Coefficient of a basis index (zero if absent).
    pub fn coeff(&self, index: usize) -> C64 {
        self.coeffs.get(&index).copied().unwrap_or_default()
    }
}

/// Solve for the degree-n monic orthogonal polynomial.
pub fn build_pi(n: usize, table: &MomentTable) -> Result<EllipticPolynomial> {
    if n == 1 {
        return Err(EopError::InvalidBasisIndex { index: 1 });
    }
    let mut coeffs = BTreeMap::new();
    coeffs.insert(n, C64::new(1.0, 0.0));
    if n == 0 {
        return Ok(EllipticPolynomial { degree: 0, coeffs });
    }
    let idx = hankel::basis_indices_below(n);
    let matrix = hankel::moment_matrix(n, table)?;
    let det: DetValue = {
        let (value, cond) = crate::linalg::lu_det(&matrix)?;
        let scale = matrix
            .iter()
            .map(|r| r.iter().map(|c| c.norm()).sum::<f64>().max(1e-300))
            .product();
        DetValue { value, cond, scale }
    };
    if det.is_singular() {
        return Err(EopError::SingularMomentMatrix);
    }
    let rhs: Vec<C64> = idx
        .iter()
        .map(|&m| table.mixed(n, m).map(|mu| -mu))
        .collect::<Result<_>>()?;
    let solution = lu_solve(&matrix, &rhs)?;
    for (i, c) in idx.into_iter().zip(solution) {
        // The checkerboard structure produces exact zeros on the
        // wrong-parity indices for even weights; keep the map sparse.
        if c != C64::new(0.0, 0.0) {
            coeffs.insert(i, c);
        }
    }
    Ok(EllipticPolynomial { degree: n, coeffs })
}

/// Cauchy transform of `p` at `z`, off the contour and lattice.
pub fn cauchy_transform(p: &EllipticPolynomial, z: C64, table: &MomentTable) -> Result<C64> {
    let lat = &table.lat;
    let dist = lat.distance_to_contour(z);
    if dist < CONTOUR_MARGIN {
        return Err(EopError::TooCloseToContour { dist });
    }
    // Reject z itself on the lattice (the kernel's shifted term needs it).
    let (zr, _, _) = lat.reduce(z);
    let _ = lat.weierstrass(zr)?;
    let integral = contour_quadrature(
        |w| {
            let kernel = match (lat.weierstrass(w - z), lat.weierstrass(w)) {
                (Ok(a), Ok(b)) => a.zeta - b.zeta,
                _ => return C64::new(f64::NAN, 0.0),
            };
            match p.eval(w, lat) {
                Ok(v) => v * kernel,
                Err(_) => C64::new(f64::NAN, 0.0),
            }
        },
        lat,
        &table.weight,
        table.quadrature_tol(),
    )?;
    Ok(integral / crate::two_pi_i())
}

/// Cauchy transform evaluated close to the contour (constant weight only).
///
/// The integrand is 1-periodic in `w` and analytic between lattice rows,
/// so the contour can be slid vertically without endpoint corrections (the
/// two vertical legs cancel by periodicity). Sliding away from `z` keeps
/// the kernel pole at a safe distance; `side = +1` computes the value on
/// the upper side of the contour (slide down), `side = -1` the lower.
pub fn cauchy_transform_near(
    p: &EllipticPolynomial,
    z: C64,
    side: f64,
    table: &MomentTable,
) -> Result<C64> {
    if !table.weight.is_constant_one() {
        return Err(EopError::WeightNotConstant);
    }
    let lat = &table.lat;
    let shift = -side * 0.25 * lat.tau;
    let start = lat.tau / 2.0 + shift;
    let integral = crate::quad::integrate_01(
        |s| {
            let w = start + s;
            let kernel = match (lat.weierstrass(w - z), lat.weierstrass(w)) {
                (Ok(a), Ok(b)) => a.zeta - b.zeta,
                _ => return C64::new(f64::NAN, 0.0),
            };
            match p.eval(w, lat) {
                Ok(v) => v * kernel,
                Err(_) => C64::new(f64::NAN, 0.0),
            }
        },
        table.quadrature_tol(),
    )?;
    Ok(integral / crate::two_pi_i())
}

/// 2x2 matrix of consecutive polynomials and their Cauchy transforms.
///
/// The general variant pairs degrees `(n, n-1)` for `n >= 3`; the even
/// variant pairs `(2k, 2k-2)` for `k >= 1`. The second row is scaled by
/// `2 pi i / h_prev` where `h_prev` is the lower polynomial's squared norm.
#[derive(Clone, Debug)]
pub struct RhpMatrix {
    pub top_degree: usize,
    pub bottom_degree: usize,
    pub h_prev: C64,
    pub top: EllipticPolynomial,
    pub bottom: EllipticPolynomial,
}

/// General pairing `(n, n-1)`, `n >= 3`.
pub fn assemble_y(n: usize, table: &MomentTable) -> Result<RhpMatrix> {
    if n < 3 {
        return Err(EopError::InvalidInput(format!(
            "general matrix needs degree >= 3, got {n}"
        )));
    }
    build_rhp(n, n - 1, table)
}

/// Even pairing `(2k, 2k-2)`, `k >= 1`.
pub fn assemble_y_even(k: usize, table: &MomentTable) -> Result<RhpMatrix> {
    if k < 1 {
        return Err(EopError::InvalidInput(
            "even matrix needs k >= 1".to_string(),
        ));
    }
    build_rhp(2 * k, 2 * k - 2, table)
}

fn build_rhp(top_n: usize, bottom_n: usize, table: &MomentTable) -> Result<RhpMatrix> {
    let top = build_pi(top_n, table)?;
    let bottom = build_pi(bottom_n, table)?;
    let h_prev = hankel::norm_h(bottom_n, table)?;
    Ok(RhpMatrix {
        top_degree: top_n,
        bottom_degree: bottom_n,
        h_prev,
        top,
        bottom,
    })
}

impl RhpMatrix {
    pub fn eval(&self, z: C64, table: &MomentTable) -> Result<Mat2> {
        let lat = &table.lat;
        let scale = crate::two_pi_i() / self.h_prev;
        let mut m22 = scale * cauchy_transform(&self.bottom, z, table)?;
        if self.bottom_degree == 0 {
            // The degree-0 transform is quasi-periodic; the boundary-value
            // solution adds the zeta term that cancels the period defects
            // and supplies the required z^{-1} pole at the origin.
            m22 += lat.weierstrass(z)?.zeta;
        }
        Ok(Mat2::new(
            self.top.eval(z, lat)?,
            cauchy_transform(&self.top, z, table)?,
            scale * self.bottom.eval(z, lat)?,
            m22,
        ))
    }
}

/// Second series coefficient `c_{2,n}` of `z^n pi_n(z)` around the origin,
/// extracted by projection on an 8-point ring of radius 1e-2. With only
/// even powers present the ring average of `g(z)/z^2` aliases first at
/// `z^10`, i.e. at the 1e-16 level.
pub fn series_c2(p: &EllipticPolynomial, lat: &LatticeData) -> Result<C64> {
    let r = 1e-2;
    let n = 8;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.37) / n as f64;
        let z = C64::from_polar(r, th);
        let g = p.eval(z, lat)? * z.powu(p.degree as u32) - 1.0;
        acc += g / (z * z);
    }
    Ok(acc / n as f64)
}

/// Derivative of a basis expansion, as a basis expansion:
/// `d E_{2k} = -2k E_{2k+1}` and
/// `d E_{2k+3} = -(2k+3) E_{2k+4} + (g2 (2k+1)/4) E_{2k} + (k g3/2) E_{2k-2}`
/// (from `wp'' = 6 wp^2 - g2/2` and the cubic for `wp'^2`).
pub fn basis_derivative(coeffs: &BTreeMap<usize, C64>, lat: &LatticeData) -> BTreeMap<usize, C64> {
    let mut out: BTreeMap<usize, C64> = BTreeMap::new();
    let mut add = |idx: usize, c: C64| {
        *out.entry(idx).or_insert(C64::new(0.0, 0.0)) += c;
    };
    for (&i, &c) in coeffs {
        if i % 2 == 0 {
            let k = i / 2;
            if k >= 1 {
                add(2 * k + 1, -2.0 * k as f64 * c);
            }
        } else {
            let k = (i - 3) / 2;
            add(2 * k + 4, -(2.0 * k as f64 + 3.0) * c);
            add(2 * k, c * lat.g2 * (2.0 * k as f64 + 1.0) / 4.0);
            if k >= 1 {
                add(2 * k - 2, c * lat.g3 * (k as f64) / 2.0);
            }
        }
    }
    out
}

/// `m`-th z-derivative of Weierstrass zeta as a basis expansion
/// (`zeta' = -wp`, so every higher derivative is an elliptic polynomial).
pub fn zeta_derivative_basis(m: usize, lat: &LatticeData) -> BTreeMap<usize, C64> {
    assert!(m >= 1);
    let mut cur = BTreeMap::new();
    cur.insert(2usize, C64::new(-1.0, 0.0)); // zeta' = -wp
    for _ in 1..m {
        cur = basis_derivative(&cur, lat);
    }
    cur
}

/// `int E_i(z) p(z) w(z) dz` through the moment table (exact algebra).
pub fn inner_with_basis(i: usize, p: &EllipticPolynomial, table: &MomentTable) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (&j, &c) in &p.coeffs {
        acc += c * table.mixed(i, j)?;
    }
    Ok(acc)
}

/// Second series coefficient of the normalised Cauchy transform,
/// `2 pi i C(pi_n)(z) / (h_n z^{n-1}) = 1 + ct_{2,n} z^2 + ...`.
///
/// Computed exactly from moments: the kernel's Taylor coefficients are
/// zeta derivatives, so `h_n ct_{2,n} = (-1)^{n+1} <zeta^{(n+1)}, pi_n> / (n+1)!`.
/// (A small-z quadrature fit cannot reach these coefficients beyond degree
/// five: the transform value there is ~1e-10 of the integrand scale and
/// the extraction amplifies the roundoff floor past 1e-5.)
pub fn series_c2_tilde(p: &EllipticPolynomial, h_n: C64, table: &MomentTable) -> Result<C64> {
    let n = p.degree;
    if n < 2 {
        return Err(EopError::InvalidInput(
            "transform expansion needs degree >= 2".into(),
        ));
    }
    let zd = zeta_derivative_basis(n + 1, &table.lat);
    let mut integral = C64::new(0.0, 0.0);
    for (&i, &c) in &zd {
        integral += c * inner_with_basis(i, p, table)?;
    }
    let mut factorial = 1.0f64;
    for m in 2..=(n + 1) {
        factorial *= m as f64;
    }
    let sign = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * integral / (factorial * h_n))
}
