//! Numerics for orthogonal systems of elliptic functions on a torus.
//!
//! The library is organised in layers:
//!
//! * [`elliptic`] — Weierstrass special functions for the lattice with
//!   periods `1` and `tau` (theta constants, nome and lambda maps, wp, wp',
//!   Weierstrass zeta, half-period values, invariants, complete elliptic
//!   integrals by AGM).
//! * [`moments`] — contour quadrature of weighted power moments along the
//!   segment `[tau/2, tau/2 + 1]`, the even-moment recursion and the mixed
//!   moment grid.
//! * [`hankel`] — even/odd Hankel determinants, bordered determinants, the
//!   checkerboard determinant and norm ladders.
//! * [`polynomials`] — monic elliptic polynomials solved from the moment
//!   matrix, their Cauchy transforms, and the 2x2 boundary-value matrices
//!   built from consecutive polynomials.
//! * [`recurrences`] — recurrence coefficient ladders, the three-term
//!   relation, and the difference/differential matrix systems with their
//!   compatibility residuals.
//! * [`painleve`] — the even-index Lax pair, the reduction to a 4-point
//!   Fuchsian system, Painleve VI solutions from determinant ratios, and
//!   tau functions with their bilinear recursion constants.
//! * [`scan`] — winding-number zero scanner for Hankel determinants over a
//!   grid in the modular parameter.
//! * [`verify`] — the all-up verification suites with machine-readable
//!   reports.

pub mod diff;
pub mod elliptic;
pub mod error;
pub mod hankel;
pub mod linalg;
pub mod moments;
pub mod painleve;
pub mod polynomials;
pub mod quad;
pub mod recurrences;
pub mod scalar;
pub mod scan;
pub mod verify;

pub use error::{EopError, Result};

/// Double-precision complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// `2 pi i`, the residue normalisation of the Cauchy transforms.
pub fn two_pi_i() -> C64 {
    C64::new(0.0, 2.0 * std::f64::consts::PI)
}
