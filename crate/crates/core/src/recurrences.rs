//! Recurrence coefficient ladders and the difference/differential matrix
//! systems they satisfy (constant weight).
//!
//! With `f_n(z) = wp(z) + alpha_n`, the coefficients are
//!
//! * `alpha_n` — the constant part of `det Y_n - wp`, extracted by
//!   averaging the determinant over probe points (the identity is exact,
//!   so probing beats series fitting),
//! * `beta_n = h_n / h_{n-1}` over the degree sequence `{0, 2, 3, ...}`
//!   (the predecessor of 2 is 0),
//! * `B_n = beta_{n+1} + beta_n + alpha_n + alpha_{n+1}` — the three-term
//!   coefficient in `pi_{n+2} = (wp - B_n) pi_n - beta_n beta_{n-1} pi_{n-2}`.
//!
//! The one-point ladder step for `alpha_{n+1}` is a rational function of
//! `(alpha_{n-1}, alpha_n)`; its denominator ends in `- g3 (2n - 3)`,
//! which is the only dimensionally consistent variant and the one that
//! reproduces the direct ladder (see `alpha_step_variant` and the tests).

use crate::diff::ring_derivative_mat;
use crate::elliptic::LatticeData;
use crate::error::{EopError, Result};
use crate::hankel;
use crate::linalg::Mat2;
use crate::moments::MomentTable;
use crate::polynomials::{assemble_y, EllipticPolynomial};
use crate::C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use std::collections::BTreeMap;

/// How a ladder entry was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Direct,
    Recursed,
}

/// Probe points for determinant-based constant extraction.
#[derive(Clone, Debug)]
pub struct ProbeSet(pub Vec<C64>);

impl ProbeSet {
    /// Five fixed interior points, scaled by the cell height; far from the
    /// lattice and the contour.
    pub fn deterministic(lat: &LatticeData) -> Self {
        let h = lat.tau.im;
        ProbeSet(
            [
                (0.23, 0.21),
                (-0.31, 0.29),
                (0.11, -0.27),
                (-0.17, 0.13),
                (0.37, -0.33),
            ]
            .iter()
            .map(|&(x, y)| C64::new(x, y * h / 1.2))
            .collect(),
        )
    }

    /// Seeded random probes in the safe interior band.
    pub fn seeded(lat: &LatticeData, seed: u64, count: usize) -> Self {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let h = lat.tau.im;
        let mut pts = Vec::with_capacity(count);
        while pts.len() < count {
            let z = C64::new(rng.gen_range(-0.45..0.45), rng.gen_range(-0.35..0.35) * h);
            if lat.distance_to_contour(z) > 0.1 * h && z.norm() > 0.1 {
                pts.push(z);
            }
        }
        ProbeSet(pts)
    }
}

/// Sequences `alpha_n`, `beta_n`, `h_n`, `B_n` with provenance tags.
#[derive(Clone, Debug)]
pub struct RecurrenceLadder {
    pub lat: LatticeData,
    pub alphas: BTreeMap<usize, (C64, Provenance)>,
    pub betas: BTreeMap<usize, C64>,
    pub hs: BTreeMap<usize, C64>,
    pub bs: BTreeMap<usize, C64>,
}

impl RecurrenceLadder {
    pub fn alpha(&self, n: usize) -> Result<C64> {
        self.alphas
            .get(&n)
            .map(|(v, _)| *v)
            .ok_or_else(|| EopError::InvalidInput(format!("ladder has no alpha_{n}")))
    }

    pub fn beta(&self, n: usize) -> Result<C64> {
        self.betas
            .get(&n)
            .copied()
            .ok_or_else(|| EopError::InvalidInput(format!("ladder has no beta_{n}")))
    }

    pub fn h(&self, n: usize) -> Result<C64> {
        self.hs
            .get(&n)
            .copied()
            .ok_or_else(|| EopError::InvalidInput(format!("ladder has no h_{n}")))
    }

    pub fn b(&self, n: usize) -> Result<C64> {
        self.bs
            .get(&n)
            .copied()
            .ok_or_else(|| EopError::InvalidInput(format!("ladder has no B_{n}")))
    }

    /// `f_n(z) = wp(z) + alpha_n`.
    pub fn f(&self, n: usize, wp: C64) -> Result<C64> {
        Ok(wp + self.alpha(n)?)
    }
}

/// Extract `alpha_n` as the probe average of `det Y_n - wp`; the spread
/// across probes is required to be small since the identity is exact.
pub fn alpha_from_det(n: usize, table: &MomentTable, probes: &ProbeSet) -> Result<C64> {
    let y = assemble_y(n, table)?;
    let mut vals = Vec::with_capacity(probes.0.len());
    for &z in &probes.0 {
        let m = y.eval(z, table)?;
        vals.push(m.det() - table.lat.wp(z)?);
    }
    let mean = vals.iter().sum::<C64>() / vals.len() as f64;
    let spread = vals.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
    let tol = 1e-7 * mean.norm().max(1.0);
    if spread > tol {
        return Err(EopError::ProbeSpread { spread, tol });
    }
    Ok(mean)
}

/// Direct ladder up to `alpha_{n_max}` (needs determinants up to
/// `Delta_{n_max + 2}`).
pub fn ladder_direct(
    n_max: usize,
    table: &MomentTable,
    probes: &ProbeSet,
) -> Result<RecurrenceLadder> {
    if !table.weight.is_constant_one() {
        return Err(EopError::WeightNotConstant);
    }
    let mut hs = BTreeMap::new();
    for n in (0..=n_max + 1).filter(|&n| n != 1) {
        match hankel::norm_h(n, table) {
            Ok(v) => {
                hs.insert(n, v);
            }
            Err(EopError::MissingMoments { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let mut betas = BTreeMap::new();
    for (&n, &h) in hs.iter().filter(|(&n, _)| n >= 2) {
        let prev = hankel::prev_degree(n);
        if let Some(&hp) = hs.get(&prev) {
            betas.insert(n, h / hp);
        }
    }
    let mut alphas = BTreeMap::new();
    for n in 3..=n_max {
        let a = alpha_from_det(n, table, probes)?;
        alphas.insert(n, (a, Provenance::Direct));
    }
    let mut bs = BTreeMap::new();
    for n in 3..n_max {
        if let (Some(&(a0, _)), Some(&(a1, _)), Some(&b0), Some(&b1)) = (
            alphas.get(&n),
            alphas.get(&(n + 1)),
            betas.get(&n),
            betas.get(&(n + 1)),
        ) {
            bs.insert(n, b1 + b0 + a0 + a1);
        }
    }
    Ok(RecurrenceLadder {
        lat: table.lat,
        alphas,
        betas,
        hs,
        bs,
    })
}

/// Denominator variants of the one-point `alpha` step. Both printed forms
/// circulate with a final term that is either dimensionally inconsistent
/// (`-g2 (2n-3)`) or sign-flipped (`+g3 (2n-3)`); the direct-ladder oracle
/// selects `-g3 (2n-3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaDenominator {
    /// `... - g2 (2n - 3)`
    G2Tail,
    /// `... + g3 (2n - 3)`
    PlusG3Tail,
    /// `... - g3 (2n - 3)` (validated; the default)
    MinusG3Tail,
}

/// One ladder step: `alpha_{n+1}` from `(alpha_{n-1}, alpha_n)`.
pub fn alpha_step(alpha_prev: C64, alpha_cur: C64, n: usize, lat: &LatticeData) -> Result<C64> {
    alpha_step_variant(AlphaDenominator::MinusG3Tail, alpha_prev, alpha_cur, n, lat)
}

pub fn alpha_step_variant(
    variant: AlphaDenominator,
    alpha_prev: C64,
    alpha_cur: C64,
    n: usize,
    lat: &LatticeData,
) -> Result<C64> {
    let (g2, g3) = (lat.g2, lat.g3);
    let nf = n as f64;
    let a = alpha_cur;
    let ap = alpha_prev;
    let num = (1.0 - nf) * a * (4.0 * a.powu(3) - 3.0 * g2 * a + 4.0 * g3)
        - ap * (4.0 * (nf - 2.0) * a.powu(3) + nf * g2 * a - (2.0 * nf - 1.0) * g3);
    let tail = match variant {
        AlphaDenominator::G2Tail => -g2 * (2.0 * nf - 3.0),
        AlphaDenominator::PlusG3Tail => g3 * (2.0 * nf - 3.0),
        AlphaDenominator::MinusG3Tail => -g3 * (2.0 * nf - 3.0),
    };
    let den =
        4.0 * nf * a.powu(3) + (nf - 1.0) * ap * (g2 - 12.0 * a * a) + g2 * (nf - 2.0) * a + tail;
    let scale = g2.norm().max(a.norm() * a.norm()).powf(1.5).max(1e-300);
    if den.norm() <= 1e-12 * scale {
        return Err(EopError::SingularRecurrence {
            den_abs: den.norm(),
        });
    }
    Ok(num / den)
}

/// `beta_n` from the cubic relation
/// `beta_n = (g3 - g2 a_n + 4 a_n^3) / (4 (a_{n-1} - a_n)(a_n - a_{n+1}))`.
pub fn beta_from_alphas(
    alpha_prev: C64,
    alpha_cur: C64,
    alpha_next: C64,
    lat: &LatticeData,
) -> Result<C64> {
    let den = 4.0 * (alpha_prev - alpha_cur) * (alpha_cur - alpha_next);
    if den.norm() <= 1e-12 * alpha_cur.norm().powi(2).max(1.0) {
        return Err(EopError::SingularRecurrence {
            den_abs: den.norm(),
        });
    }
    Ok((lat.g3 - lat.g2 * alpha_cur + 4.0 * alpha_cur.powu(3)) / den)
}

/// Residual of the cubic constraint
/// `-a_n^3 + g2 a_n / 4 - g3 / 4 = beta_n (a_{n-1} - a_n)(a_{n+1} - a_n)`.
pub fn cubic_relation_residual(n: usize, ladder: &RecurrenceLadder) -> Result<f64> {
    let a_prev = ladder.alpha(n - 1)?;
    let a = ladder.alpha(n)?;
    let a_next = ladder.alpha(n + 1)?;
    let beta = ladder.beta(n)?;
    let lhs = -a.powu(3) + ladder.lat.g2 * a / 4.0 - ladder.lat.g3 / 4.0;
    let rhs = beta * (a_prev - a) * (a_next - a);
    Ok((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0))
}

/// Extend a direct ladder with recursed `alpha` entries up to `n_max`.
pub fn extend_by_recursion(ladder: &RecurrenceLadder, n_max: usize) -> Result<RecurrenceLadder> {
    let mut out = ladder.clone();
    let mut n = *ladder
        .alphas
        .keys()
        .max()
        .ok_or_else(|| EopError::InvalidInput("empty ladder".into()))?;
    while n < n_max {
        let a_prev = out.alpha(n - 1)?;
        let a_cur = out.alpha(n)?;
        let next = alpha_step(a_prev, a_cur, n, &out.lat)?;
        out.alphas.insert(n + 1, (next, Provenance::Recursed));
        n += 1;
    }
    Ok(out)
}

/// Relative residual of the three-term relation
/// `pi_{n+2} - (wp - B_n) pi_n + beta_n beta_{n-1} pi_{n-2}` at `z`.
pub fn three_term_residual(
    n: usize,
    z: C64,
    ladder: &RecurrenceLadder,
    polys: &BTreeMap<usize, EllipticPolynomial>,
) -> Result<f64> {
    if n < 4 {
        return Err(EopError::InvalidInput(format!(
            "three-term relation needs n >= 4, got {n}"
        )));
    }
    let get = |m: usize| {
        polys
            .get(&m)
            .ok_or_else(|| EopError::InvalidInput(format!("missing pi_{m}")))
    };
    let lat = &ladder.lat;
    let wp = lat.wp(z)?;
    let p_next = get(n + 2)?.eval(z, lat)?;
    let p_mid = get(n)?.eval(z, lat)?;
    let p_prev = get(n - 2)?.eval(z, lat)?;
    let b = ladder.b(n)?;
    let resid = p_next - (wp - b) * p_mid + ladder.beta(n)? * ladder.beta(n - 1)? * p_prev;
    let scale = p_next
        .norm()
        .max(((wp - b) * p_mid).norm())
        .max(p_prev.norm())
        .max(1.0);
    Ok(resid.norm() / scale)
}

/// Relative residual of the one-step relation
/// `pi_{n+1} + wp' pi_n / (2 f_n) + beta_n f_{n+1} pi_{n-1} / f_n` at `z`.
pub fn one_step_residual(
    n: usize,
    z: C64,
    ladder: &RecurrenceLadder,
    polys: &BTreeMap<usize, EllipticPolynomial>,
) -> Result<f64> {
    let get = |m: usize| {
        polys
            .get(&m)
            .ok_or_else(|| EopError::InvalidInput(format!("missing pi_{m}")))
    };
    let lat = &ladder.lat;
    let v = lat.weierstrass(z)?;
    let f_n = ladder.f(n, v.wp)?;
    if f_n.norm() < 1e-10 {
        return Err(EopError::PoleOfSystem { fn_abs: f_n.norm() });
    }
    let f_next = ladder.f(n + 1, v.wp)?;
    let p_next = get(n + 1)?.eval(z, lat)?;
    let p_mid = get(n)?.eval(z, lat)?;
    let p_prev = get(n - 1)?.eval(z, lat)?;
    let resid = p_next + v.wp_prime * p_mid / (2.0 * f_n) + ladder.beta(n)? * f_next * p_prev / f_n;
    let scale = p_next.norm().max(1.0);
    Ok(resid.norm() / scale)
}

/// Difference and differential coefficient matrices `(R_n, L_n)` with
/// `Y_{n+1} = R_n Y_n` and `Y_n' = L_n Y_n`.
pub fn lax_matrices(n: usize, z: C64, ladder: &RecurrenceLadder) -> Result<(Mat2, Mat2)> {
    let lat = &ladder.lat;
    let v = lat.weierstrass(z)?;
    let f_n = ladder.f(n, v.wp)?;
    if f_n.norm() < 1e-10 {
        return Err(EopError::PoleOfSystem { fn_abs: f_n.norm() });
    }
    let f_prev = ladder.f(n - 1, v.wp)?;
    let f_next = ladder.f(n + 1, v.wp)?;
    let h_n = ladder.h(n)?;
    let h_prev = ladder.h(hankel::prev_degree(n))?;
    let two_pi_i = crate::two_pi_i();
    let nf = n as f64;
    let r = Mat2::new(
        -v.wp_prime / 2.0,
        -(h_n / two_pi_i) * f_next,
        (two_pi_i / h_n) * f_n,
        C64::new(0.0, 0.0),
    )
    .scale(C64::new(1.0, 0.0) / f_n);
    let l = Mat2::new(
        nf * v.wp_prime / 2.0,
        (h_n / two_pi_i) * ((nf - 1.0) * f_n + nf * f_next),
        (two_pi_i / h_prev) * ((2.0 - nf) * f_prev + (1.0 - nf) * f_n),
        (2.0 - nf) * v.wp_prime / 2.0,
    )
    .scale(C64::new(1.0, 0.0) / f_n);
    Ok((r, l))
}

/// Max entry magnitude of `R_n' - L_{n+1} R_n + R_n L_n` at `z`, with the
/// z-derivative of `R_n` by Cauchy-ring differentiation.
pub fn compatibility_residual(n: usize, z: C64, ladder: &RecurrenceLadder) -> Result<f64> {
    let (r, l) = lax_matrices(n, z, ladder)?;
    let (_, l_next) = lax_matrices(n + 1, z, ladder)?;
    let r_prime = ring_derivative_mat(
        |w| match lax_matrices(n, w, ladder) {
            Ok((rw, _)) => rw,
            Err(_) => Mat2::new(
                C64::new(f64::NAN, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
            ),
        },
        z,
        1e-3,
        8,
    );
    let resid = r_prime.sub(&l_next.mul(&r)).add(&r.mul(&l));
    Ok(resid.norm_max())
}

/// The four power-matching equations of the compatibility condition,
/// evaluated on ladder data; all four vanish on a consistent ladder.
pub fn coefficient_equations(n: usize, ladder: &RecurrenceLadder) -> Result<[C64; 4]> {
    let nf = n as f64;
    let (g2, g3) = (ladder.lat.g2, ladder.lat.g3);
    let a0 = ladder.alpha(n - 1)?;
    let a1 = ladder.alpha(n)?;
    let a2 = ladder.alpha(n + 1)?;
    let a3 = ladder.alpha(n + 2)?;
    let b1 = ladder.beta(n)?;
    let b2 = ladder.beta(n + 1)?;
    let q1 = (nf - 2.0) * a1 - (nf + 1.0) * a2 + (2.0 * nf - 3.0) * b1 - (2.0 * nf + 1.0) * b2;
    let q2 = 3.0 * a1 * a2 + g2 / 2.0
        - (((nf - 2.0) * a0 + (nf - 1.0) * a1 + 2.0 * (2.0 * nf - 3.0) * a2) * b1
            - ((4.0 * nf + 2.0) * a1 + nf * a2 + (nf + 1.0) * a3) * b2);
    let q3 = 3.0 * g3 + g2 * nf * a1
        - g2 * (nf - 1.0) * a2
        - (4.0 * a2 * (2.0 * (nf - 2.0) * a0 + 2.0 * (nf - 1.0) * a1 + (2.0 * nf - 3.0) * a2) * b1
            - 4.0 * a1 * ((2.0 * nf + 1.0) * a1 + 2.0 * nf * a2 + 2.0 * (nf + 1.0) * a3) * b2);
    let q4 = -a2 * (g2 * a1 + g3 * (nf - 2.0)) + g3 * (nf + 1.0) * a1
        - (-4.0 * (nf * a2 + (nf + 1.0) * a3) * a1 * a1 * b2
            + 4.0 * ((nf - 2.0) * a0 + (nf - 1.0) * a1) * a2 * a2 * b1);
    Ok([q1, q2, q3, q4])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{lattice_from_tau, TruncationPolicy};
    use crate::polynomials::build_pi;

    fn table(tau: C64, j_max: usize) -> MomentTable {
        let lat = lattice_from_tau(tau, &TruncationPolicy::default()).unwrap();
        MomentTable::by_recursion_exact_seeds(lat, j_max).unwrap()
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    fn ladder_at(tau: C64, n_max: usize) -> (MomentTable, RecurrenceLadder) {
        let t = table(tau, 20);
        let probes = ProbeSet::deterministic(&t.lat);
        let ladder = ladder_direct(n_max, &t, &probes).unwrap();
        (t, ladder)
    }

    #[test]
    fn alpha3_alpha4_closed_forms() {
        let (_, ladder) = ladder_at(C64::new(0.0, 1.2), 4);
        let (g2, g3, e) = (ladder.lat.g2, ladder.lat.g3, ladder.lat.eta1_half);
        let a3_closed = (3.0 * g3 - 4.0 * g2 * e) / (g2 - 48.0 * e * e);
        let a4_closed = (5.0 * g2.powu(3) - 108.0 * g3 * g3 + 108.0 * g2 * g3 * e
            - 432.0 * g2 * g2 * e * e
            + 8640.0 * g3 * e.powu(3))
            / (18.0 * (3.0 * g3 - 4.0 * g2 * e) * (g2 - 48.0 * e * e));
        assert!(rel(ladder.alpha(3).unwrap(), a3_closed) < 1e-8);
        assert!(rel(ladder.alpha(4).unwrap(), a4_closed) < 1e-8);
        // frozen 40-digit oracle values at tau = 1.2i
        assert!(
            rel(
                ladder.alpha(3).unwrap(),
                C64::new(-16.554253284447857017, 0.0)
            ) < 1e-9
        );
        assert!(
            rel(
                ladder.alpha(4).unwrap(),
                C64::new(3.1644375907028912597, 0.0)
            ) < 1e-9
        );
    }

    #[test]
    fn beta2_is_h2() {
        let (_, ladder) = ladder_at(C64::new(0.0, 1.2), 3);
        // beta_2 = h_2 / h_0 with h_0 = 1
        let lat = &ladder.lat;
        let want = -4.0 * lat.eta1_half * lat.eta1_half + lat.g2 / 12.0;
        assert!(rel(ladder.beta(2).unwrap(), want) < 1e-9);
    }

    #[test]
    fn alpha_step_variant_selection() {
        // Only the -g3 tail reproduces the direct alpha_5 / alpha_6 at a
        // lattice with g3 != 0; the two printed tails are off by O(1).
        let (_, ladder) = ladder_at(C64::new(0.0, 1.2), 6);
        let a3 = ladder.alpha(3).unwrap();
        let a4 = ladder.alpha(4).unwrap();
        let a5 = ladder.alpha(5).unwrap();
        let a6 = ladder.alpha(6).unwrap();
        let lat = &ladder.lat;

        let good = alpha_step_variant(AlphaDenominator::MinusG3Tail, a3, a4, 4, lat).unwrap();
        assert!(rel(good, a5) < 1e-7, "step {good} vs direct {a5}");
        let good6 = alpha_step_variant(AlphaDenominator::MinusG3Tail, a4, good, 5, lat).unwrap();
        assert!(rel(good6, a6) < 1e-6);

        for bad in [AlphaDenominator::G2Tail, AlphaDenominator::PlusG3Tail] {
            let v = alpha_step_variant(bad, a3, a4, 4, lat).unwrap();
            assert!(
                (v - a5).norm() > 1.0,
                "variant {bad:?} unexpectedly matches: {v} vs {a5}"
            );
        }
    }

    #[test]
    fn recursed_ladder_agrees_with_direct() {
        for tau in [C64::new(0.0, 1.0), C64::new(0.0, 1.2), C64::new(0.0, 0.8)] {
            let (_, direct) = ladder_at(tau, 7);
            let trimmed = RecurrenceLadder {
                alphas: direct
                    .alphas
                    .iter()
                    .filter(|(&n, _)| n <= 4)
                    .map(|(&n, &v)| (n, v))
                    .collect(),
                ..direct.clone()
            };
            let recursed = extend_by_recursion(&trimmed, 7).unwrap();
            for n in 5..=7usize {
                let a = direct.alpha(n).unwrap();
                let b = recursed.alpha(n).unwrap();
                assert!(
                    rel(b, a) < 1e-6,
                    "n = {n}, tau = {tau}: recursed {b} vs direct {a}"
                );
                assert_eq!(recursed.alphas[&n].1, Provenance::Recursed);
            }
        }
    }

    #[test]
    fn beta_recurrence_consistency() {
        // beta_5 from the cubic relation equals h_5 / h_4.
        let (_, ladder) = ladder_at(C64::new(0.0, 1.2), 6);
        let b5 = beta_from_alphas(
            ladder.alpha(4).unwrap(),
            ladder.alpha(5).unwrap(),
            ladder.alpha(6).unwrap(),
            &ladder.lat,
        )
        .unwrap();
        assert!(rel(b5, ladder.beta(5).unwrap()) < 1e-7);
    }

    #[test]
    fn cubic_relation_over_range() {
        let (_, ladder) = ladder_at(C64::new(0.0, 1.0), 8);
        for n in 4..=7usize {
            let r = cubic_relation_residual(n, &ladder).unwrap();
            assert!(r < 1e-8, "n = {n}: residual {r}");
        }
    }

    #[test]
    fn three_term_and_one_step() {
        let (t, ladder) = ladder_at(C64::new(0.0, 1.0), 6);
        let mut polys = BTreeMap::new();
        for n in (0..=8).filter(|&n| n != 1) {
            polys.insert(n, build_pi(n, &t).unwrap());
        }
        let z = C64::new(0.3, 0.55 * 0.5);
        let r3 = three_term_residual(4, z, &ladder, &polys).unwrap();
        assert!(r3 < 1e-8, "three-term residual {r3}");
        let r1 = one_step_residual(4, z, &ladder, &polys).unwrap();
        assert!(r1 < 1e-8, "one-step residual {r1}");
        // even split: the n = 4 relation touches even polynomials only
        for m in [2usize, 4, 6] {
            assert!(polys[&m].coeffs.keys().all(|i| i % 2 == 0));
        }
    }

    #[test]
    fn difference_system_maps_y4_to_y5() {
        let (t, ladder) = ladder_at(C64::new(0.0, 1.0), 6);
        let y4 = assemble_y(4, &t).unwrap();
        let y5 = assemble_y(5, &t).unwrap();
        let z = C64::new(0.27, 0.31);
        let (r4, _) = lax_matrices(4, z, &ladder).unwrap();
        let lhs = y5.eval(z, &t).unwrap();
        let rhs = r4.mul(&y4.eval(z, &t).unwrap());
        let gap = lhs.sub(&rhs).norm_max();
        assert!(gap < 1e-7 * lhs.norm_max().max(1.0), "difference gap {gap}");
    }

    #[test]
    fn differential_system_matches_ring_derivative() {
        let (t, ladder) = ladder_at(C64::new(0.0, 1.0), 6);
        let y4 = assemble_y(4, &t).unwrap();
        let z = C64::new(-0.21, 0.24);
        let (_, l4) = lax_matrices(4, z, &ladder).unwrap();
        let y_prime = ring_derivative_mat(|w| y4.eval(w, &t).unwrap(), z, 1e-2, 8);
        let rhs = l4.mul(&y4.eval(z, &t).unwrap());
        let gap = y_prime.sub(&rhs).norm_max();
        assert!(
            gap < 1e-6 * rhs.norm_max().max(1.0),
            "differential gap {gap}"
        );
    }

    #[test]
    fn lax_trace_identity() {
        // tr L_n = wp' / f_n, read off the diagonal.
        let (_, ladder) = ladder_at(C64::new(0.0, 1.0), 6);
        let z = C64::new(0.19, -0.23);
        let (_, l4) = lax_matrices(4, z, &ladder).unwrap();
        let v = ladder.lat.weierstrass(z).unwrap();
        let f4 = ladder.f(4, v.wp).unwrap();
        assert!(rel(l4.trace(), v.wp_prime / f4) < 1e-12);
    }

    #[test]
    fn compatibility_residual_and_sensitivity() {
        let (_, ladder) = ladder_at(C64::new(0.0, 1.0), 7);
        let z = C64::new(0.25, 0.3);
        let (r, l) = lax_matrices(4, z, &ladder).unwrap();
        let scale = r.norm_max() * l.norm_max();
        let resid = compatibility_residual(4, z, &ladder).unwrap();
        assert!(resid < 1e-6 * scale, "residual {resid} scale {scale}");

        // Perturbing alpha_5 by 1e-3 must raise the residual by >= 10x.
        let mut bad = ladder.clone();
        let (a5, p) = bad.alphas[&5];
        bad.alphas.insert(5, (a5 + 1e-3, p));
        let worse = compatibility_residual(4, z, &bad).unwrap();
        assert!(worse > 10.0 * resid.max(1e-12), "{worse} vs {resid}");
    }

    #[test]
    fn coefficient_equations_vanish() {
        let (_, ladder) = ladder_at(C64::new(0.0, 1.0), 7);
        let qs = coefficient_equations(4, &ladder).unwrap();
        let scale = ladder.lat.g2.norm();
        for (i, q) in qs.iter().enumerate() {
            assert!(q.norm() < 1e-7 * scale, "Q{}: {q}", i + 1);
        }
    }

    #[test]
    fn pole_of_system_detected() {
        let (_, ladder) = ladder_at(C64::new(0.0, 1.0), 5);
        let mut l = ladder.clone();
        let z = C64::new(0.23, 0.17);
        let wp = l.lat.wp(z).unwrap();
        l.alphas.insert(4, (-wp, Provenance::Direct));
        assert!(matches!(
            lax_matrices(4, z, &l),
            Err(EopError::PoleOfSystem { .. })
        ));
    }

    #[test]
    fn seeded_probes_are_reproducible() {
        let lat = lattice_from_tau(C64::new(0.0, 1.0), &TruncationPolicy::default()).unwrap();
        let a = ProbeSet::seeded(&lat, 42, 5);
        let b = ProbeSet::seeded(&lat, 42, 5);
        assert_eq!(a.0, b.0);
    }
}
