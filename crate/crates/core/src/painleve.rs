//! Even-index Lax pair, its reduction to a 4-point Fuchsian system, the
//! Painleve VI solutions built from Hankel determinant ratios, and the tau
//! functions with their bilinear recursion constants.
//!
//! The z-equation for the even matrix `Y_{2k}` reads
//! `Y' = L_{2k} Y` with `L_{2k} = wp' sum_i L^{(i)} / (wp - e_i)`; the
//! residue matrices are obtained by partial fractions from the
//! quadratic-in-wp numerator, whose coefficients come from the `z^2` and
//! `z^4` expansion matrices `U`, `V` (pure Hankel data). The traceless
//! gauge shifts each residue by `-1/4` and carries monodromy exponents
//! `1/2` at the half-periods and `(4k-3)/2` at the origin.
//!
//! On the imaginary tau axis everything becomes a function of the lambda
//! value `t in (0, 1)`. The solution and tau function are
//!
//! `u_k = 1 - E/K + (2 t (t-1) / (4k-1)) (D'_{2k}/D_{2k} - D'_{2k+2}/D_{2k+2})`
//!
//! `T_k = t^{1/8} (1-t)^{1/8} (2K)^{-k(2k-3)} Delta_{2k}`
//!
//! with `zeta_k = t(t-1) d/dt log T_k`. The t-derivatives are carried by
//! jets (exact first and second derivatives through the whole pipeline);
//! third-order information uses a central difference of exact first
//! derivatives with outer step 1e-6.

use crate::diff::{ring_derivative, ring_derivative_mat};
use crate::elliptic::{
    lattice_from_tau, lattice_scalars_from_t, LatticeData, TScalars, TruncationPolicy,
};
use crate::error::{EopError, Result};
use crate::hankel;
use crate::linalg::{lu_det, Mat2};
use crate::moments::{recursion_fill, MomentTable};
use crate::polynomials::assemble_y_even;
use crate::scalar::{CScalar, Jet, Jet3};
use crate::C64;

/// Largest even index `2k` the Painleve layer will touch.
pub const MAX_K: usize = 5;

fn guard_k(k: usize) -> Result<()> {
    if k > MAX_K {
        return Err(EopError::DepthExceeded { dim: k, max: MAX_K });
    }
    Ok(())
}

fn guard_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(EopError::InvalidInput(format!(
            "lambda value must lie in (0, 1), got {t}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Even Lax pair
// ---------------------------------------------------------------------------

/// Coefficients of the even-index z-equation.
#[derive(Clone, Debug)]
pub struct EvenLaxData {
    pub k: usize,
    pub lat: LatticeData,
    /// `z^2` expansion matrix (traceless).
    pub u_mat: Mat2,
    /// `z^4` expansion matrix.
    pub v_mat: Mat2,
    /// Numerator coefficients: `L(z) = (lt[2] wp^2 + lt[1] wp + lt[0]) / wp'`.
    pub ltilde: [Mat2; 3],
    /// Residue matrices `L^{(i)}` at `wp = e_i`.
    pub residues: [Mat2; 3],
    /// Traceless-gauge residues `L^{(i)} - 1/4`.
    pub traceless: [Mat2; 3],
}

/// Build the even Lax data for index `2k` from Hankel determinants.
pub fn even_lax(k: usize, table: &MomentTable) -> Result<EvenLaxData> {
    guard_k(k)?;
    if k == 0 {
        return Err(EopError::InvalidInput("even Lax data needs k >= 1".into()));
    }
    let lat = table.lat;
    let two_pi_i = crate::two_pi_i();
    let d2k = hankel::delta(2 * k, table)?;
    if d2k.is_singular() {
        return Err(EopError::SingularLadder {
            det_abs: d2k.value.norm(),
            scale: d2k.scale,
        });
    }
    let d2k2 = hankel::delta(2 * k + 2, table)?.value;
    let d2km2 = hankel::delta(2 * k - 2, table)?.value;
    let (g2k, l2k) = hankel::bordered(2 * k, table)?;
    let (g2k2, _) = hankel::bordered(2 * k + 2, table)?;
    let (g2km2, _) = hankel::bordered(2 * k - 2, table)?;
    let h2k = d2k2 / d2k.value;
    let h2km2 = d2k.value / d2km2;

    let u11 = -g2k / d2k.value;
    let u_mat = Mat2::new(u11, h2k / two_pi_i, two_pi_i / h2km2, -u11);
    let v11 = l2k / d2k.value + (k as f64) * lat.g2 / 20.0;
    let v12 = (h2k / two_pi_i) * (g2k2 / d2k2);
    let v21 = (two_pi_i / h2km2) * (-g2km2 / d2km2);
    // det of (1 + z^2 U + z^4 V + ...) matches det Y_{2k} times z^3, which
    // is -wp'/2 * z^3 = 1 - g2 z^4/20 + ..., so tr V = -g2/20 - det U.
    let v22 = -lat.g2 / 20.0 - u_mat.det() - v11;
    let v_mat = Mat2::new(v11, v12, v21, v22);

    let lam = Mat2::diag(
        C64::new(-2.0 * k as f64, 0.0),
        C64::new(2.0 * k as f64 - 3.0, 0.0),
    );
    // Y' Y^{-1} = Lam/z + z (2U + [U, Lam])
    //           + z^3 (4V - 2U^2 + [V, Lam] + [Lam, U] U) + O(z^5);
    // matching against (lt2 wp^2 + lt1 wp + lt0)/wp' absorbs an extra
    // (3 g2/10) Lam into the constant coefficient.
    let c1 = u_mat.scale(C64::new(2.0, 0.0)).add(&u_mat.commutator(&lam));
    let c0 = v_mat
        .scale(C64::new(4.0, 0.0))
        .sub(&u_mat.mul(&u_mat).scale(C64::new(2.0, 0.0)))
        .add(&v_mat.commutator(&lam))
        .add(&lam.commutator(&u_mat).mul(&u_mat));
    let lt2 = lam.scale(C64::new(-2.0, 0.0));
    let lt1 = c1.scale(C64::new(-2.0, 0.0));
    let lt0 = c0.scale(C64::new(-2.0, 0.0)).add(&lam.scale(lat.g2 * 0.3));

    let es = [lat.e1, lat.e2, lat.e3];
    let mut residues = [Mat2::zero(); 3];
    let mut traceless = [Mat2::zero(); 3];
    for i in 0..3 {
        let e = es[i];
        let mut prod = C64::new(4.0, 0.0);
        for (j, &ej) in es.iter().enumerate() {
            if j != i {
                prod *= e - ej;
            }
        }
        let num = lt2.scale(e * e).add(&lt1.scale(e)).add(&lt0);
        residues[i] = num.scale(C64::new(1.0, 0.0) / prod);
        traceless[i] = residues[i].sub(&Mat2::identity().scale(C64::new(0.25, 0.0)));
    }
    Ok(EvenLaxData {
        k,
        lat,
        u_mat,
        v_mat,
        ltilde: [lt0, lt1, lt2],
        residues,
        traceless,
    })
}

impl EvenLaxData {
    /// `L_{2k}(z) = wp'(z) sum_i L^{(i)} / (wp(z) - e_i)`.
    pub fn l_at(&self, z: C64) -> Result<Mat2> {
        let v = self.lat.weierstrass(z)?;
        let es = [self.lat.e1, self.lat.e2, self.lat.e3];
        let mut acc = Mat2::zero();
        for (i, &e) in es.iter().enumerate() {
            acc = acc.add(&self.residues[i].scale(v.wp_prime / (v.wp - e)));
        }
        Ok(acc)
    }

    /// Monodromy exponents: the positive exponent at each half-period and
    /// at the origin, from eigenvalues of the traceless residues (the
    /// z-residue at a half-period is `2 L^{(i)}`; at the origin it is
    /// `diag(-2k, 2k-3) + 3/2`).
    pub fn monodromy_exponents(&self) -> ([C64; 3], C64) {
        let mut at_half = [C64::new(0.0, 0.0); 3];
        for i in 0..3 {
            let (l1, l2) = self.traceless[i].scale(C64::new(2.0, 0.0)).eigenvalues();
            at_half[i] = if l1.re >= l2.re { l1 } else { l2 };
        }
        let kf = self.k as f64;
        let at_origin = C64::new((2.0 * kf - 3.0 + 3.0 / 2.0).abs(), 0.0);
        (at_half, at_origin)
    }
}

/// Residual of the tau-direction equation `dY/dtau = M Y` at one `(z, tau)`
/// for both circulating conventions of `M`:
/// `M = sum L^(i) (wp_dot - e_i_dot) / (c (wp - e_i))` with `c = 1` or `2`.
/// Returns `(residual_c1, residual_c2)` relative to `max ||dY/dtau||`.
/// The `c = 1` form wins by orders of magnitude (see tests);
/// [`tau_flow_residual`] reports it.
pub fn tau_flow_residual_both(k: usize, tau: C64, z: C64) -> Result<(f64, f64)> {
    guard_k(k)?;
    let policy = TruncationPolicy::default();
    let j_max = 2 * k + 4;
    let y_at = |tv: C64| -> Result<Mat2> {
        let lat = lattice_from_tau(tv, &policy)?;
        let table = MomentTable::by_recursion_exact_seeds(lat, j_max)?;
        assemble_y_even(k, &table)?.eval(z, &table)
    };
    let lat = lattice_from_tau(tau, &policy)?;
    let table = MomentTable::by_recursion_exact_seeds(lat, j_max)?;
    let lax = even_lax(k, &table)?;
    let y = y_at(tau)?;
    let y_dot = ring_derivative_mat(|tv| y_at(tv).unwrap_or_else(|_| Mat2::zero()), tau, 1e-2, 8);

    // d/dtau of wp(z; tau) and of the half-period values.
    let wp_dot = ring_derivative(
        |tv| {
            lattice_from_tau(tv, &policy)
                .and_then(|l| l.wp(z))
                .unwrap_or(C64::new(f64::NAN, 0.0))
        },
        tau,
        1e-2,
        8,
    );
    let mut e_dots = [C64::new(0.0, 0.0); 3];
    for (i, e_dot) in e_dots.iter_mut().enumerate() {
        *e_dot = ring_derivative(
            |tv| match lattice_from_tau(tv, &policy) {
                Ok(l) => [l.e1, l.e2, l.e3][i],
                Err(_) => C64::new(f64::NAN, 0.0),
            },
            tau,
            1e-2,
            8,
        );
    }
    let v = lat.weierstrass(z)?;
    let es = [lat.e1, lat.e2, lat.e3];
    let mut m1 = Mat2::zero();
    for i in 0..3 {
        m1 = m1.add(&lax.residues[i].scale((wp_dot - e_dots[i]) / (v.wp - es[i])));
    }
    let m2 = m1.scale(C64::new(0.5, 0.0));
    let scale = y_dot.norm_max().max(1e-300);
    let r1 = y_dot.sub(&m1.mul(&y)).norm_max() / scale;
    let r2 = y_dot.sub(&m2.mul(&y)).norm_max() / scale;
    Ok((r1, r2))
}

/// Residual of `dY/dtau = M Y` with the validated convention.
pub fn tau_flow_residual(k: usize, tau: C64, z: C64) -> Result<f64> {
    Ok(tau_flow_residual_both(k, tau, z)?.0)
}

// ---------------------------------------------------------------------------
// Fuchsian reduction
// ---------------------------------------------------------------------------

/// 4-point Fuchsian system on the x-plane with singularities `{0, 1, t}`
/// (images of the half-periods) and the origin mapped to infinity.
#[derive(Clone, Debug)]
pub struct FuchsianSystem {
    pub k: usize,
    pub t: C64,
    /// Residue matrices keyed by half-period index.
    pub a: [Mat2; 3],
    /// x-plane location of each residue.
    pub locations: [C64; 3],
    /// `theta_0 = 3/2 - 2k`.
    pub theta0: f64,
}

/// Reduce the even Lax data at `tau(t)` to the Fuchsian system, by the
/// diagonal gauge `(e1 - e2)^{(4k-3) sigma_3 / 4}`. The base
/// `e1 - e2 = 4K^2` is positive on the physical line; a base within 1e-8
/// radians of the negative real axis is reported as a branch ambiguity.
pub fn fuchsian(k: usize, t: f64, table: &MomentTable) -> Result<FuchsianSystem> {
    guard_k(k)?;
    guard_t(t)?;
    let lax = even_lax(k, table)?;
    let lat = &table.lat;
    let base = lat.e1 - lat.e2;
    if base.norm() == 0.0 || (std::f64::consts::PI - base.arg().abs()) < 1e-8 {
        return Err(EopError::BranchAmbiguity);
    }
    let expo = (4.0 * k as f64 - 3.0) / 4.0;
    let w = base.powf(expo);
    let gauge = Mat2::diag(w, 1.0 / w);
    let gauge_inv = Mat2::diag(1.0 / w, w);
    let mut a = [Mat2::zero(); 3];
    for i in 0..3 {
        a[i] = gauge.mul(&lax.traceless[i]).mul(&gauge_inv);
    }
    // x = (wp - e2)/(e1 - e2) sends e1 -> 1, e2 -> 0, e3 -> t.
    let locations = [
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        (lat.e3 - lat.e2) / base,
    ];
    Ok(FuchsianSystem {
        k,
        t: lat.t,
        a,
        locations,
        theta0: 1.5 - 2.0 * k as f64,
    })
}

// ---------------------------------------------------------------------------
// Determinant pipeline on the t-line (scalar generic)
// ---------------------------------------------------------------------------

/// Even Hankel determinants `Delta_{2k}` for `k = 0..=k_max` as functions
/// of the lambda value, running on any scalar (jets included).
pub fn deltas_from_t<S: CScalar>(t: S, k_max: usize) -> Result<(TScalars<S>, Vec<S>)> {
    let sc = lattice_scalars_from_t(t)?;
    let j_max = (2 * k_max).saturating_sub(2).max(1);
    let seeds = [S::from_f64(1.0), -(sc.eta1 + sc.eta1)];
    let m = recursion_fill(sc.g2, sc.g3, &seeds, j_max);
    let mut deltas = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mat: Vec<Vec<S>> = (0..k).map(|i| (0..k).map(|j| m[i + j]).collect()).collect();
        deltas.push(lu_det(&mat)?.0);
    }
    Ok((sc, deltas))
}

/// Bordered determinants `Gamma_{2k}` on the same pipeline.
fn gammas_from_t(t: C64, k_max: usize) -> Result<Vec<C64>> {
    let sc = lattice_scalars_from_t(t)?;
    let seeds = [C64::new(1.0, 0.0), -2.0 * sc.eta1];
    let m = recursion_fill(sc.g2, sc.g3, &seeds, (2 * k_max).max(1) + 1);
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        if k == 0 {
            out.push(C64::new(0.0, 0.0));
            continue;
        }
        let cols: Vec<usize> = (0..=k).filter(|&j| j != k - 1).collect();
        let mat: Vec<Vec<C64>> = (0..k)
            .map(|i| cols.iter().map(|&j| m[i + j]).collect())
            .collect();
        out.push(lu_det(&mat)?.0);
    }
    Ok(out)
}

/// Log-derivative data of one determinant: `R = D'/D` and its first two
/// derivatives, from a third-order jet.
#[derive(Clone, Copy, Debug)]
struct LogDeriv {
    r: C64,
    r_prime: C64,
    r_second: C64,
}

fn log_deriv(jet: Jet3) -> LogDeriv {
    let r = jet.d1 / jet.f;
    let r_prime = jet.d2 / jet.f - r * r;
    let r_second = jet.d3 / jet.f - 3.0 * (jet.d2 / jet.f) * r + 2.0 * r * r * r;
    LogDeriv {
        r,
        r_prime,
        r_second,
    }
}

/// Solution value with exact first and second t-derivatives from the
/// determinant-ratio formula, plus the cross-check value from the
/// bordered-determinant route (no derivatives involved).
#[derive(Clone, Copy, Debug)]
pub struct SolutionData {
    pub u: C64,
    pub u_dot: C64,
    pub u_ddot: C64,
    /// Value from the bordered-determinant route.
    pub u_alt: C64,
}

pub fn u_data(k: usize, t: f64) -> Result<SolutionData> {
    guard_k(k)?;
    guard_t(t)?;
    let tj = Jet3::var(C64::new(t, 0.0));
    let (sc, deltas) = deltas_from_t(tj, k + 1)?;
    for d in &deltas {
        if d.f.norm() < 1e-12 {
            return Err(EopError::SingularLadder {
                det_abs: d.f.norm(),
                scale: 1.0,
            });
        }
    }
    let eok = sc.big_e / sc.big_k;
    let rk = log_deriv(deltas[k]);
    let rk2 = log_deriv(deltas[k + 1]);
    let tc = C64::new(t, 0.0);
    let denom = 4.0 * k as f64 - 1.0;
    let coef = 2.0 * tc * (tc - 1.0) / denom;
    let coef_prime = 2.0 * (2.0 * tc - 1.0) / denom;
    let coef_second = C64::new(4.0 / denom, 0.0);
    let dr = rk.r - rk2.r;
    let dr1 = rk.r_prime - rk2.r_prime;
    let dr2 = rk.r_second - rk2.r_second;
    let u = C64::new(1.0, 0.0) - eok.f + coef * dr;
    let u_dot = -eok.d1 + coef_prime * dr + coef * dr1;
    let u_ddot = -eok.d2 + coef_second * dr + 2.0 * coef_prime * dr1 + coef * dr2;

    // Independent route through the bordered determinants.
    let (scc, dets) = deltas_from_t(tc, k + 1)?;
    let gs = gammas_from_t(tc, k + 1)?;
    let kf = k as f64;
    let u_alt = ((4.0 * kf - 3.0) * gs[k] / dets[k] - (4.0 * kf + 1.0) * gs[k + 1] / dets[k + 1])
        / (denom * 4.0 * scc.big_k * scc.big_k)
        + (1.0 + tc) / 3.0;
    Ok(SolutionData {
        u,
        u_dot,
        u_ddot,
        u_alt,
    })
}

/// Value, exact first derivative, and the bordered-route cross-check.
pub fn u_and_derivative(k: usize, t: f64) -> Result<(C64, C64, C64)> {
    let d = u_data(k, t)?;
    Ok((d.u, d.u_dot, d.u_alt))
}

/// Painleve VI solution from the determinant ratios; the two routes must
/// agree, a gap beyond 1e-5 is reported as a formula mismatch.
pub fn u_of_t(k: usize, t: f64) -> Result<C64> {
    let (u, _, u_alt) = u_and_derivative(k, t)?;
    let gap = (u - u_alt).norm();
    if gap > 1e-5 * u.norm().max(1.0) {
        return Err(EopError::FormulaMismatch { gap });
    }
    Ok(u)
}

/// `wp(Q)`-based cross-check value of the first nontrivial solution: the
/// zero of the off-diagonal Lax entry maps to `u_1` under
/// `u = (wp(Q) - e1)/(e2 - e1)`.
pub fn u1_from_wp_q(t: f64) -> Result<C64> {
    guard_t(t)?;
    let sc = lattice_scalars_from_t(C64::new(t, 0.0))?;
    let (g2, g3, e) = (sc.g2, sc.g3, sc.eta1);
    let wp_q = sc.e1 + sc.e2 + 2.0 * (16.0 * e.powu(3) + g2 * e - g3) / (48.0 * e * e - g2);
    Ok((wp_q - sc.e1) / (sc.e2 - sc.e1))
}

/// Residual of the Painleve VI equation with parameters
/// `(theta_0, theta_1, theta_2, theta_3) = (3/2 - 2k, 1/2, 1/2, 1/2)`, i.e.
/// leading coefficient `(2k - 1/2)^2`. All derivatives come exactly from
/// third-order jets; a difference stencil on the first derivative would
/// be noise-limited near the ends of (0, 1) where the determinants are
/// badly cancelled.
pub fn pvi_residual(k: usize, t: f64) -> Result<f64> {
    let SolutionData {
        u, u_dot, u_ddot, ..
    } = u_data(k, t)?;
    let tc = C64::new(t, 0.0);
    let one = C64::new(1.0, 0.0);
    let lead = (2.0 * k as f64 - 0.5).powi(2);
    let term1 = 0.5 * (one / u + one / (u - one) + one / (u - tc)) * u_dot * u_dot;
    let term2 = (one / tc + one / (tc - one) + one / (u - tc)) * u_dot;
    let term3 = u * (u - one) * (u - tc) / (2.0 * tc * tc * (tc - one) * (tc - one))
        * (C64::new(lead, 0.0) - tc / (4.0 * u * u)
            + (tc - one) / (4.0 * (u - one) * (u - one))
            + 3.0 * tc * (tc - one) / (4.0 * (u - tc) * (u - tc)));
    let rhs = term1 - term2 + term3;
    // The equation cancels terms of size ~1/t^2 down to u''; the honest
    // residual is relative to the largest participating term.
    let scale = u_ddot
        .norm()
        .max(term1.norm())
        .max(term2.norm())
        .max(term3.norm())
        .max(1.0);
    Ok((u_ddot - rhs).norm() / scale)
}

/// Conjugate momentum, gauge factor, and Hamiltonian-like function.
pub fn v_g_zeta(k: usize, t: f64) -> Result<(C64, C64, C64)> {
    let (u, u_dot, _) = u_and_derivative(k, t)?;
    let tc = C64::new(t, 0.0);
    let one = C64::new(1.0, 0.0);
    if u.norm() < 1e-10 || (u - one).norm() < 1e-10 || (u - tc).norm() < 1e-10 {
        return Err(EopError::DegenerateU);
    }
    // t(t-1) u' = -t/2 + u (t - u/2 + 2 v (u-t)(u-1)), solved for v.
    let v = (tc * (tc - one) * u_dot + tc / 2.0 - u * tc + u * u / 2.0)
        / (2.0 * u * (u - tc) * (u - one));
    let zeta = zeta_from_uv(k, tc, u, v);
    // Cross-check against the determinant route.
    let (closed, _) = zeta_and_derivative(k, t)?;
    let gap = (zeta - closed).norm();
    if gap > 1e-7 * zeta.norm().max(1.0) {
        return Err(EopError::FormulaMismatch { gap });
    }
    // Gauge factor: g = -(2k-1)/(4 pi i (2k-3)) K^{1-4k} h_{2k}.
    let tj = Jet::var(tc);
    let (sc, deltas) = deltas_from_t(tj, k + 1)?;
    let h2k = deltas[k + 1] / deltas[k];
    let kf = k as f64;
    let c = C64::new(-(2.0 * kf - 1.0), 0.0) / (2.0 * crate::two_pi_i() * (2.0 * kf - 3.0));
    let g = c * sc.big_k.f.powf(1.0 - 4.0 * kf) * h2k.f;
    Ok((v, g, zeta))
}

/// Hamiltonian-like function from the coordinates.
pub fn zeta_from_uv(k: usize, t: C64, u: C64, v: C64) -> C64 {
    let kf = k as f64;
    let one = C64::new(1.0, 0.0);
    u * (u - t) * (u - one) * v * v
        - 0.5 * (t - 2.0 * (one + t) * u + 3.0 * u * u) * v
        - 0.5 * kf * (2.0 * kf - 3.0) * u
        + 0.25 * (4.0 * kf * kf - 6.0 * kf + 1.0) * t
        - C64::new(0.125, 0.0)
}

/// Hamiltonian-like function with exact first and second derivatives via
/// the determinant route:
/// `zeta_k = t(t-1) D'_{2k}/D_{2k} + (k/2)(2k-3)(E/K + t - 1) + (2t-1)/8`.
pub fn zeta_data(k: usize, t: f64) -> Result<(C64, C64, C64)> {
    guard_k(k)?;
    guard_t(t)?;
    let tj = Jet3::var(C64::new(t, 0.0));
    let (sc, deltas) = deltas_from_t(tj, k)?;
    let r = log_deriv(deltas[k]);
    let eok = sc.big_e / sc.big_k;
    let tc = C64::new(t, 0.0);
    let kf = k as f64;
    let cx = 0.5 * kf * (2.0 * kf - 3.0);
    let zeta = tc * (tc - 1.0) * r.r + cx * (eok.f + tc - 1.0) + (2.0 * tc - 1.0) / 8.0;
    let zeta_dot = (2.0 * tc - 1.0) * r.r
        + tc * (tc - 1.0) * r.r_prime
        + cx * (eok.d1 + 1.0)
        + C64::new(0.25, 0.0);
    let zeta_ddot =
        2.0 * r.r + 2.0 * (2.0 * tc - 1.0) * r.r_prime + tc * (tc - 1.0) * r.r_second + cx * eok.d2;
    Ok((zeta, zeta_dot, zeta_ddot))
}

/// Value and exact first derivative of the Hamiltonian-like function.
pub fn zeta_and_derivative(k: usize, t: f64) -> Result<(C64, C64)> {
    let (z, zd, _) = zeta_data(k, t)?;
    Ok((z, zd))
}

/// Residual of the quadratic second-order ODE satisfied by `zeta_k`:
///
/// `(t(t-1) z'')^2 = -4 z' (t z' - z)((t-1) z' - z) + z'^2 / 2`
/// `  + A_k (t z' - z)((t-1) z' - z) + B_k z' + C_k`
///
/// with `A_k = 2(2k-1)(k-1)`, `B_k = -(8k^2 - 12k + 3)/16`,
/// `C_k = (-(k(2k-3))^2 + 3(4k^2-6k+1)^2/4 + 1/4)/32`, derived by exact
/// elimination from the Hamiltonian system (holds identically along the
/// flow; checked here on the determinant route).
pub fn sigma_residual(k: usize, t: f64) -> Result<f64> {
    let (zeta, zeta_dot, zeta_ddot) = zeta_data(k, t)?;
    let tc = C64::new(t, 0.0);
    let kf = k as f64;
    let a_k = 2.0 * (2.0 * kf - 1.0) * (kf - 1.0);
    let b_k = -(8.0 * kf * kf - 12.0 * kf + 3.0) / 16.0;
    let q1 = kf * (2.0 * kf - 3.0);
    let q2 = 4.0 * kf * kf - 6.0 * kf + 1.0;
    let c_k = (-q1 * q1 + 0.75 * q2 * q2 + 0.25) / 32.0;
    let p = tc * zeta_dot - zeta;
    let q = (tc - 1.0) * zeta_dot - zeta;
    let lhs = (tc * (tc - 1.0) * zeta_ddot).powu(2);
    let rhs = -4.0 * zeta_dot * p * q
        + 0.5 * zeta_dot * zeta_dot
        + a_k * p * q
        + b_k * zeta_dot
        + C64::new(c_k, 0.0);
    let scale = lhs.norm().max(rhs.norm()).max(1.0);
    Ok((lhs - rhs).norm() / scale)
}

// ---------------------------------------------------------------------------
// Tau functions and the bilinear recursion constants
// ---------------------------------------------------------------------------

/// Tau function jets `T_k(t) = t^{1/8} (1-t)^{1/8} (2K)^{-k(2k-3)} Delta_{2k}`.
fn tau_jets(t: f64, k_max: usize) -> Result<Vec<Jet>> {
    let tj = Jet::var(C64::new(t, 0.0));
    let (sc, deltas) = deltas_from_t(tj, k_max)?;
    let one = Jet::constant(C64::new(1.0, 0.0));
    let prefactor = tj.powf(0.125) * (one - tj).powf(0.125);
    let two_k = sc.big_k.scale(2.0);
    let mut out = Vec::with_capacity(k_max + 1);
    for (k, d) in deltas.iter().enumerate() {
        let kf = k as i32;
        let expo = -kf * (2 * kf - 3);
        out.push(prefactor * two_k.powi(expo) * *d);
    }
    Ok(out)
}

/// Tau function value at one `(k, t)`.
pub fn tau_value(k: usize, t: f64) -> Result<C64> {
    guard_k(k)?;
    guard_t(t)?;
    Ok(tau_jets(t, k)?[k].f)
}

/// The bilinear recursion constant at one grid point:
/// `s_k = [4(4k-3)^2 t^2(t-1)^2 T T'' - 4(4k-1)(4k-5) t^2(t-1)^2 T'^2`
/// ` + 2((4k-3)^2+1) t(t-1)(2t-1) T T'`
/// ` + (2(k-1)(2k-1)(4k^2-6k+1+t-t^2) - 1/4) T^2] / (T_{k-1} T_{k+1})`.
pub fn s_constant_at(k: usize, t: f64) -> Result<C64> {
    if k == 0 {
        return Err(EopError::InvalidInput(
            "bilinear recursion starts at k = 1".into(),
        ));
    }
    guard_k(k)?;
    guard_t(t)?;
    let taus = tau_jets(t, k + 1)?;
    let tm = taus[k - 1].f;
    let tp = taus[k + 1].f;
    let t0 = taus[k].f;
    let t1 = taus[k].d1;
    let t2 = taus[k].d2;
    let tc = C64::new(t, 0.0);
    let kf = k as f64;
    let w = tc * (tc - 1.0);
    let num = 4.0 * (4.0 * kf - 3.0).powi(2) * w * w * t0 * t2
        - 4.0 * (4.0 * kf - 1.0) * (4.0 * kf - 5.0) * w * w * t1 * t1
        + 2.0 * ((4.0 * kf - 3.0).powi(2) + 1.0) * w * (2.0 * tc - 1.0) * t0 * t1
        + (C64::new(2.0 * (kf - 1.0) * (2.0 * kf - 1.0), 0.0)
            * (C64::new(4.0 * kf * kf - 6.0 * kf + 1.0, 0.0) + tc - tc * tc)
            - C64::new(0.25, 0.0))
            * t0
            * t0;
    Ok(num / (tm * tp))
}

#[derive(Clone, Debug)]
pub struct SConstant {
    pub k: usize,
    pub value: C64,
    pub spread: f64,
}

#[derive(Clone, Debug)]
pub struct TauLadder {
    /// Per grid point: `(t, [T_0(t), ..., T_{k_max+1}(t)])`.
    pub tau_values: Vec<(f64, Vec<C64>)>,
    pub s: Vec<SConstant>,
}

/// Recursion constants `s_1 .. s_{k_max}` estimated on a t-grid; each must
/// be constant across the grid to a 1e-4 relative spread.
pub fn tau_and_sk(k_max: usize, t_grid: &[f64]) -> Result<TauLadder> {
    guard_k(k_max)?;
    if t_grid.len() < 5 {
        return Err(EopError::InvalidInput(format!(
            "need at least 5 grid points, got {}",
            t_grid.len()
        )));
    }
    let mut tau_values = Vec::new();
    for &t in t_grid {
        guard_t(t)?;
        let taus = tau_jets(t, k_max + 1)?;
        tau_values.push((t, taus.iter().map(|j| j.f).collect::<Vec<_>>()));
    }
    let mut s = Vec::new();
    for k in 1..=k_max {
        let vals: Vec<C64> = t_grid
            .iter()
            .map(|&t| s_constant_at(k, t))
            .collect::<Result<_>>()?;
        let mean = vals.iter().sum::<C64>() / vals.len() as f64;
        let spread =
            vals.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max) / mean.norm().max(1e-300);
        if spread > 1e-4 {
            return Err(EopError::NonConstantS { k, spread });
        }
        s.push(SConstant {
            k,
            value: mean,
            spread,
        });
    }
    Ok(TauLadder { tau_values, s })
}

// ---------------------------------------------------------------------------
// Bundles
// ---------------------------------------------------------------------------

/// Values of the Painleve data at one `(k, t)`, with first derivatives.
#[derive(Clone, Copy, Debug)]
pub struct PainleveBundle {
    pub k: usize,
    pub t: f64,
    pub u: C64,
    pub u_dot: C64,
    pub v: C64,
    pub g: C64,
    pub zeta: C64,
    pub zeta_dot: C64,
    pub tau: C64,
}

pub fn bundle(k: usize, t: f64) -> Result<PainleveBundle> {
    let (u, u_dot, _) = u_and_derivative(k, t)?;
    let (v, g, zeta) = v_g_zeta(k, t)?;
    let (_, zeta_dot) = zeta_and_derivative(k, t)?;
    let tau = tau_value(k, t)?;
    Ok(PainleveBundle {
        k,
        t,
        u,
        u_dot,
        v,
        g,
        zeta,
        zeta_dot,
        tau,
    })
}

/// `zeta` defined through the tau function: `t(t-1) d/dt log T_k`, exact.
pub fn zeta_from_tau_def(k: usize, t: f64) -> Result<C64> {
    let taus = tau_jets(t, k)?;
    let j = taus[k];
    Ok(C64::new(t * (t - 1.0), 0.0) * j.d1 / j.f)
}

/// The two bookkeeping conventions for `theta_0`: `(4k-3)/2` from the
/// residue eigenvalues and `3/2 - 2k` from the Fuchsian normalisation;
/// they differ by sign only.
pub fn theta0_conventions(k: usize) -> (f64, f64) {
    ((4.0 * k as f64 - 3.0) / 2.0, 1.5 - 2.0 * k as f64)
}
