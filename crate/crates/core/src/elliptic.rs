//! Weierstrass layer for the lattice with periods `1` and `tau`.
//!
//! Everything is built from Jacobi theta series at the standard nome
//! `p = exp(i pi tau)`:
//!
//! * half-period values `e1 = wp(1/2)`, `e2 = wp(tau/2)`,
//!   `e3 = wp((1+tau)/2)` from fourth powers of theta constants,
//! * the lambda value `t = theta2^4 / theta3^4`,
//! * invariants `g2`, `g3`,
//! * `eta1 = zeta(1/2) = -(pi^2/6) theta1'''(0)/theta1'(0)`,
//! * `wp`, `wp'` and Weierstrass `zeta` via theta quotients, with a
//!   truncated Laurent expansion inside a small disc around each lattice
//!   point where the quotient loses accuracy,
//! * complete elliptic integrals `K`, `E` by the arithmetic-geometric mean
//!   (DLMF 19.8), valid for complex parameter off the cut `[1, inf)`.
//!
//! The same scalar-generic entry points ([`elliptic_ke`],
//! [`lattice_scalars_from_t`]) also run on jets, which is how the
//! t-derivative pipelines get exact first and second derivatives.

use crate::error::{EopError, Result};
use crate::scalar::CScalar;
use crate::C64;
use std::f64::consts::PI;

/// Truncation control for the theta series.
#[derive(Clone, Copy, Debug)]
pub struct TruncationPolicy {
    pub rel_tol: f64,
    pub max_terms: usize,
    pub max_abs_q: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            rel_tol: 1e-16,
            max_terms: 200,
            max_abs_q: 0.85,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(EopError::InvalidInput(format!(
                "rel_tol {} outside (0, 1)",
                self.rel_tol
            )));
        }
        if self.max_terms < 16 {
            return Err(EopError::InvalidInput(format!(
                "max_terms {} below 16",
                self.max_terms
            )));
        }
        Ok(())
    }
}

/// Zero-argument theta data at a given nome.
#[derive(Clone, Copy, Debug)]
pub struct ThetaConstants {
    pub theta2: C64,
    pub theta3: C64,
    pub theta4: C64,
    /// z-derivative of theta1 at z = 0.
    pub theta1_d1: C64,
    /// third z-derivative of theta1 at z = 0.
    pub theta1_d3: C64,
}

/// Theta constants at an arbitrary nome `q`, `|q| < max_abs_q`, with the
/// principal branch for `q^{1/4}`.
pub fn theta_constants(q: C64, policy: &TruncationPolicy) -> Result<ThetaConstants> {
    policy.validate()?;
    let abs_q = q.norm();
    if abs_q > policy.max_abs_q {
        return Err(EopError::NomeTooLarge {
            abs_q,
            max: policy.max_abs_q,
        });
    }
    theta_constants_core(q, q.powf(0.25), policy)
}

/// Series engine shared by the public nome interface and the lattice
/// construction (which supplies `q^{1/4} = exp(i pi tau / 4)` analytically).
fn theta_constants_core(
    q: C64,
    q_quarter: C64,
    policy: &TruncationPolicy,
) -> Result<ThetaConstants> {
    let one = C64::new(1.0, 0.0);
    // theta3 / theta4: sum over q^{n^2}
    let mut th3 = one;
    let mut th4 = one;
    let mut pw = one; // q^{n^2}
    let mut converged = false;
    for n in 1..=policy.max_terms {
        pw *= q.powi(2 * n as i32 - 1); // q^{n^2} / q^{(n-1)^2} = q^{2n-1}
        let term = 2.0 * pw;
        th3 += term;
        if n % 2 == 0 {
            th4 += term;
        } else {
            th4 -= term;
        }
        if term.norm() <= policy.rel_tol * th3.norm() {
            converged = true;
            break;
        }
    }
    if !converged && q.norm() > 0.0 {
        return Err(EopError::NonConvergent {
            what: "theta constant series",
        });
    }

    // theta2, theta1', theta1''': sums over q^{n(n+1)} with weights (2n+1)^k
    let mut s2 = C64::new(0.0, 0.0);
    let mut s1 = C64::new(0.0, 0.0);
    let mut s3 = C64::new(0.0, 0.0);
    let mut pw = one; // q^{n(n+1)}
    let mut sign = 1.0;
    converged = false;
    for n in 0..policy.max_terms {
        if n > 0 {
            pw *= q.powi(2 * n as i32); // ratio q^{2n}
        }
        let m = (2 * n + 1) as f64;
        s2 += pw;
        s1 += sign * m * pw;
        s3 += sign * m * m * m * pw;
        sign = -sign;
        if pw.norm() * m * m * m <= policy.rel_tol * (s2.norm() + 1e-300) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(EopError::NonConvergent {
            what: "theta constant series",
        });
    }
    Ok(ThetaConstants {
        theta2: 2.0 * q_quarter * s2,
        theta3: th3,
        theta4: th4,
        theta1_d1: 2.0 * q_quarter * s1,
        theta1_d3: -2.0 * q_quarter * s3,
    })
}

/// All tau-derived scalars for the lattice with periods `1` and `tau`.
#[derive(Clone, Copy, Debug)]
pub struct LatticeData {
    pub tau: C64,
    /// Nome `exp(i pi (1 + tau))`.
    pub q: C64,
    /// Lambda value `t = theta2^4/theta3^4` at the standard nome.
    pub t: C64,
    pub g2: C64,
    pub g3: C64,
    pub e1: C64,
    pub e2: C64,
    pub e3: C64,
    /// `zeta(1/2)`.
    pub eta1_half: C64,
    /// Full period-1 increment `zeta(z+1) - zeta(z) = 2 zeta(1/2)`.
    pub eta1_shift: C64,
    /// Full period-tau increment `zeta(z+tau) - zeta(z)`.
    pub eta2_shift: C64,
    pub big_k: C64,
    pub big_e: C64,
    // cached for evaluation
    p: C64,
    p_quarter: C64,
    th3_0: C64,
    th4_0: C64,
    policy: TruncationPolicy,
    /// Laurent coefficients c2..c6 of wp at the origin.
    laurent: [C64; 5],
}

/// Distance below which a point counts as on the lattice.
pub const LATTICE_EPS: f64 = 1e-8;
/// Distance below which wp switches to the Laurent expansion.
pub const LAURENT_RADIUS: f64 = 1e-3;

/// Build every lattice scalar from the modular parameter.
pub fn lattice_from_tau(tau: C64, policy: &TruncationPolicy) -> Result<LatticeData> {
    policy.validate()?;
    if tau.im <= 0.0 {
        return Err(EopError::InvalidInput(format!(
            "modular parameter must have positive imaginary part, got {tau}"
        )));
    }
    let p = (C64::new(0.0, PI) * tau).exp();
    if p.norm() > policy.max_abs_q {
        return Err(EopError::NomeTooLarge {
            abs_q: p.norm(),
            max: policy.max_abs_q,
        });
    }
    let p_quarter = (C64::new(0.0, PI / 4.0) * tau).exp();
    let tc = theta_constants_core(p, p_quarter, policy)?;
    let (t2, t3, t4) = (tc.theta2, tc.theta3, tc.theta4);
    let pi2_3 = PI * PI / 3.0;
    let t2_4 = t2.powu(4);
    let t3_4 = t3.powu(4);
    let t4_4 = t4.powu(4);
    let e1 = pi2_3 * (t3_4 + t4_4);
    let e2 = -pi2_3 * (t2_4 + t3_4);
    let e3 = pi2_3 * (t2_4 - t4_4);
    let t = t2_4 / t3_4;
    let pi4 = PI.powi(4);
    let pi6 = PI.powi(6);
    let g2 = (4.0 * pi4 / 3.0) * (t2.powu(8) + t2_4 * t4_4 + t4.powu(8));
    let g3 = (8.0 * pi6 / 27.0) * (-t2.powu(12) + t4.powu(12) + 1.5 * t2_4 * t4_4 * (t4_4 - t2_4));
    let eta1_half = -(PI * PI / 6.0) * tc.theta1_d3 / tc.theta1_d1;
    let eta1_shift = 2.0 * eta1_half;
    let eta2_shift = tau * eta1_shift - crate::two_pi_i();
    let (big_k, big_e) = elliptic_ke(t)?;

    let c2 = g2 / 20.0;
    let c3 = g3 / 28.0;
    let c4 = c2 * c2 / 3.0;
    let c5 = 3.0 * c2 * c3 / 11.0;
    let c6 = (2.0 * c2 * c4 + c3 * c3) / 13.0;

    Ok(LatticeData {
        tau,
        q: -p,
        t,
        g2,
        g3,
        e1,
        e2,
        e3,
        eta1_half,
        eta1_shift,
        eta2_shift,
        big_k,
        big_e,
        p,
        p_quarter,
        th3_0: t3,
        th4_0: t4,
        policy: *policy,
        laurent: [c2, c3, c4, c5, c6],
    })
}

/// wp, wp' and Weierstrass zeta at one point.
#[derive(Clone, Copy, Debug)]
pub struct WeierstrassValues {
    pub wp: C64,
    pub wp_prime: C64,
    pub zeta: C64,
}

impl LatticeData {
    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    /// Reduce `z` into the period cell centred at the origin; returns the
    /// reduced point and the integer shifts `(m, n)` with
    /// `z = z' + m + n tau`.
    pub fn reduce(&self, z: C64) -> (C64, i64, i64) {
        let n = (z.im / self.tau.im).round();
        let z1 = z - n * self.tau;
        let m = z1.re.round();
        (z1 - m, m as i64, n as i64)
    }

    /// Distance from a reduced point to the nearest lattice point, and that
    /// point's cell offsets.
    fn nearest_corner(&self, zr: C64) -> (f64, C64) {
        let mut best = (f64::INFINITY, C64::new(0.0, 0.0));
        for dm in -1..=1i32 {
            for dn in -1..=1i32 {
                let corner = C64::new(dm as f64, 0.0) + C64::new(dn as f64, 0.0) * self.tau;
                let d = (zr - corner).norm();
                if d < best.0 {
                    best = (d, corner);
                }
            }
        }
        best
    }

    /// Distance from `z` to the orthogonality contour `[tau/2, tau/2+1]`
    /// modulo the lattice.
    pub fn distance_to_contour(&self, z: C64) -> f64 {
        let (zr, _, _) = self.reduce(z);
        let mut best = f64::INFINITY;
        // The contour and its translates that border the centred cell.
        for shift in [
            C64::new(0.0, 0.0),
            -self.tau,
            C64::new(-1.0, 0.0),
            C64::new(-1.0, 0.0) - self.tau,
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0) - self.tau,
        ] {
            let a = self.tau / 2.0 + shift;
            // distance from zr to the segment [a, a+1]
            let w = zr - a;
            let s = w.re.clamp(0.0, 1.0);
            best = best.min((w - C64::new(s, 0.0)).norm());
        }
        best
    }

    fn theta_12(&self, v: C64) -> Result<(C64, C64, C64, C64)> {
        // theta1, theta2 and their v-derivatives at argument v.
        let mut s1 = C64::new(0.0, 0.0);
        let mut s2 = C64::new(0.0, 0.0);
        let mut d1 = C64::new(0.0, 0.0);
        let mut d2 = C64::new(0.0, 0.0);
        let mut pw = self.p_quarter; // p^{(n+1/2)^2}
        let mut sign = 1.0;
        let mut small_runs = 0usize;
        for n in 0..self.policy.max_terms {
            if n > 0 {
                pw *= self.p.powi(2 * n as i32);
            }
            let m = (2 * n + 1) as f64;
            let (svs, cvs) = {
                let arg = m * v;
                (arg.sin(), arg.cos())
            };
            s1 += sign * pw * svs;
            d1 += sign * m * pw * cvs;
            s2 += pw * cvs;
            d2 -= m * pw * svs;
            sign = -sign;
            let tsz = pw.norm() * (svs.norm() + cvs.norm()) * (1.0 + m);
            let ssz = s1.norm() + s2.norm() + 1e-300;
            if tsz <= self.policy.rel_tol * ssz {
                small_runs += 1;
                if small_runs >= 2 {
                    return Ok((2.0 * s1, 2.0 * s2, 2.0 * d1, 2.0 * d2));
                }
            } else {
                small_runs = 0;
            }
        }
        Err(EopError::NonConvergent {
            what: "theta series with argument",
        })
    }

    fn laurent_values(&self, d: C64) -> WeierstrassValues {
        let d2 = d * d;
        let mut wp = 1.0 / d2;
        let mut wp_prime = -2.0 / (d2 * d);
        let mut zeta = 1.0 / d;
        let mut pw = d2; // d^{2k-2} for k = 2
        for (i, &c) in self.laurent.iter().enumerate() {
            let k = (i + 2) as f64;
            wp += c * pw;
            wp_prime += (2.0 * k - 2.0) * c * pw / d;
            zeta -= c * pw * d / (2.0 * k - 1.0);
            pw *= d2;
        }
        WeierstrassValues { wp, wp_prime, zeta }
    }

    /// Evaluate `wp`, `wp'` and `zeta` at `z` (off the lattice).
    pub fn weierstrass(&self, z: C64) -> Result<WeierstrassValues> {
        let (zr, m, n) = self.reduce(z);
        let (dist, corner) = self.nearest_corner(zr);
        if dist < LATTICE_EPS {
            return Err(EopError::LatticePoint { dist });
        }
        let zeta_shift = (m as f64) * self.eta1_shift + (n as f64) * self.eta2_shift;
        if dist < LAURENT_RADIUS {
            // Expand around the nearest lattice point; zeta picks up the
            // quasi-period increments of that point as well.
            let mut v = self.laurent_values(zr - corner);
            let cm = corner.re.round();
            let cn = (corner.im / self.tau.im).round();
            v.zeta += zeta_shift + cm * self.eta1_shift + cn * self.eta2_shift;
            Ok(v)
        } else {
            let v = PI * zr;
            let (th1, th2, th1d, th2d) = self.theta_12(v)?;
            let c = PI * self.th3_0 * self.th4_0;
            let quot = th2 / th1;
            let wp = self.e1 + (c * quot) * (c * quot);
            let quot_d = (th2d * th1 - th2 * th1d) / (th1 * th1);
            let wp_prime = 2.0 * PI * c * c * quot * quot_d;
            let zeta = self.eta1_shift * zr + PI * th1d / th1 + zeta_shift;
            Ok(WeierstrassValues { wp, wp_prime, zeta })
        }
    }

    /// wp alone.
    pub fn wp(&self, z: C64) -> Result<C64> {
        Ok(self.weierstrass(z)?.wp)
    }

    /// Residuals of the internal consistency identities, for diagnostics.
    pub fn validate(&self) -> Vec<(&'static str, f64)> {
        let escale = self.e1.norm().max(self.e2.norm()).max(self.e3.norm());
        let mut out = vec![("e1+e2+e3", (self.e1 + self.e2 + self.e3).norm() / escale)];
        let g2_sym = -4.0 * (self.e1 * self.e2 + self.e1 * self.e3 + self.e2 * self.e3);
        let g3_sym = 4.0 * self.e1 * self.e2 * self.e3;
        out.push((
            "g2 vs symmetric e-form",
            (self.g2 - g2_sym).norm() / self.g2.norm(),
        ));
        out.push((
            "g3 vs symmetric e-form",
            (self.g3 - g3_sym).norm() / self.g3.norm().max(escale.powi(3)),
        ));
        let k2 = 4.0 * self.big_k * self.big_k;
        out.push(("e1-e2 vs 4K^2", (self.e1 - self.e2 - k2).norm() / k2.norm()));
        // K-based half-period values against the theta-based ones.
        let f = 4.0 / 3.0 * self.big_k * self.big_k;
        let ek = [
            f * (2.0 - self.t),
            -f * (1.0 + self.t),
            f * (2.0 * self.t - 1.0),
        ];
        let gap = (self.e1 - ek[0])
            .norm()
            .max((self.e2 - ek[1]).norm())
            .max((self.e3 - ek[2]).norm());
        out.push(("half-period values, theta vs K-form", gap / escale));
        let eta_k = 2.0 / 3.0 * self.big_k * ((self.t - 2.0) * self.big_k + 3.0 * self.big_e);
        out.push((
            "eta1, theta vs K-form",
            (self.eta1_half - eta_k).norm() / self.eta1_half.norm(),
        ));
        out
    }

    /// wp(2z) from wp(z), wp'(z) via the algebraic duplication identity.
    pub fn wp_duplication(&self, wp_z: C64, wp_prime_z: C64) -> C64 {
        let wp2 = 6.0 * wp_z * wp_z - self.g2 / 2.0;
        let r = wp2 / (2.0 * wp_prime_z);
        r * r - 2.0 * wp_z
    }
}

/// Complete elliptic integrals `K(m)`, `E(m)` in the parameter convention,
/// by the arithmetic-geometric mean. Generic so jets flow through.
pub fn elliptic_ke<S: CScalar>(m: S) -> Result<(S, S)> {
    let mv = m.value();
    if mv.im == 0.0 && mv.re >= 1.0 {
        return Err(EopError::BranchCut);
    }
    let one = S::from_f64(1.0);
    let half = S::from_f64(0.5);
    let mut a = one;
    let mut b = (one - m).sqrt();
    let mut sum = m.scale(0.5); // 2^{-1} c_0^2 with c_0^2 = m
    let mut pow2 = 0.5;
    for _ in 0..64 {
        let c = (a - b) * half;
        if c.norm() <= 4e-16 * a.norm() {
            let k = S::from_f64(PI / 2.0) / a;
            let e = k * (one - sum);
            return Ok((k, e));
        }
        let an = (a + b) * half;
        let bn = (a * b).sqrt();
        pow2 *= 2.0;
        sum = sum + (c * c).scale(pow2);
        a = an;
        b = bn;
    }
    Err(EopError::NonConvergent {
        what: "arithmetic-geometric mean",
    })
}

/// Closed-form lattice scalars as functions of the lambda value `t`, used
/// by the t-parameterised pipelines (constant weight). Generic over jets.
#[derive(Clone, Copy, Debug)]
pub struct TScalars<S> {
    pub t: S,
    pub big_k: S,
    pub big_e: S,
    pub g2: S,
    pub g3: S,
    pub eta1: S,
    pub e1: S,
    pub e2: S,
    pub e3: S,
}

pub fn lattice_scalars_from_t<S: CScalar>(t: S) -> Result<TScalars<S>> {
    let (k, e) = elliptic_ke(t)?;
    let one = S::from_f64(1.0);
    let two = S::from_f64(2.0);
    let k2 = k * k;
    let k4 = k2 * k2;
    let g2 = (t * t - t + one) * k4.scale(64.0 / 3.0);
    let g3 = (t * two - one) * (t - two) * (t + one) * (k4 * k2).scale(256.0 / 27.0);
    let eta1 = k * ((t - two) * k + e.scale(3.0)).scale(2.0 / 3.0);
    let f = k2.scale(4.0 / 3.0);
    Ok(TScalars {
        t,
        big_k: k,
        big_e: e,
        g2,
        g3,
        eta1,
        e1: f * (two - t),
        e2: -f * (one + t),
        e3: f * (t * two - one),
    })
}

/// Modular parameter on the imaginary axis corresponding to a lambda value
/// `t` in (0, 1): `tau = i K(1-t) / K(t)`.
pub fn tau_from_t(t: C64) -> Result<C64> {
    let (k, _) = elliptic_ke(t)?;
    let (kp, _) = elliptic_ke(C64::new(1.0, 0.0) - t)?;
    Ok(crate::I * kp / k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    /// Brute-force theta constants: fixed-length plain sums, independent of
    /// the production truncation logic.
    fn theta_brute(q: C64) -> (C64, C64, C64) {
        let mut th2 = C64::new(0.0, 0.0);
        let mut th3 = C64::new(1.0, 0.0);
        let mut th4 = C64::new(1.0, 0.0);
        let qq = q.powf(0.25);
        for n in 0..80i32 {
            th2 += 2.0 * qq * q.powi(n * (n + 1));
            let s = if n % 2 == 0 { -1.0 } else { 1.0 };
            th3 += 2.0 * q.powi((n + 1) * (n + 1));
            th4 += s * 2.0 * q.powi((n + 1) * (n + 1));
        }
        (th2, th3, th4)
    }

    #[test]
    fn theta_zero_nome_limits() {
        let tc = theta_constants(C64::new(0.0, 0.0), &pol()).unwrap();
        assert_eq!(tc.theta3, C64::new(1.0, 0.0));
        assert_eq!(tc.theta2, C64::new(0.0, 0.0));
    }

    #[test]
    fn theta_jacobi_identity_at_paper_nome() {
        // q = exp(i pi (1 + i)) = -exp(-pi)
        let q = (C64::new(0.0, PI) * C64::new(1.0, 1.0)).exp();
        let tc = theta_constants(q, &pol()).unwrap();
        let lhs = tc.theta3.powu(4);
        let rhs = tc.theta2.powu(4) + tc.theta4.powu(4);
        assert!(rel(lhs, rhs) < 1e-14);
        // against the brute-force series
        let (b2, b3, b4) = theta_brute(q);
        assert!(rel(tc.theta2, b2) < 1e-14);
        assert!(rel(tc.theta3, b3) < 1e-14);
        assert!(rel(tc.theta4, b4) < 1e-14);
    }

    #[test]
    fn nome_too_large_rejected() {
        let err = theta_constants(C64::new(0.9, 0.0), &pol());
        assert!(matches!(err, Err(EopError::NomeTooLarge { .. })));
        let err = lattice_from_tau(C64::new(0.0, 0.001), &pol());
        assert!(matches!(err, Err(EopError::NomeTooLarge { .. })));
    }

    #[test]
    fn eta1_theta_form_matches_k_form() {
        let lat = lattice_from_tau(C64::new(0.0, 1.2), &pol()).unwrap();
        let eta_k = 2.0 / 3.0 * lat.big_k * ((lat.t - 2.0) * lat.big_k + 3.0 * lat.big_e);
        assert!(rel(lat.eta1_half, eta_k) < 1e-10);
        // frozen value from an independent 40-digit evaluation
        assert!(rel(lat.eta1_half, C64::new(1.6239181230401140972, 0.0)) < 1e-13);
    }

    #[test]
    fn square_lattice_degeneracies() {
        let lat = lattice_from_tau(C64::new(0.0, 1.0), &pol()).unwrap();
        assert!(lat.e3.norm() < 1e-12);
        assert!(lat.g3.norm() < 1e-12 * lat.g2.norm());
        assert!((lat.t - C64::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn lattice_invariants_hold() {
        for tau in [C64::new(0.0, 1.0), C64::new(0.0, 1.2), C64::new(0.3, 1.1)] {
            let lat = lattice_from_tau(tau, &pol()).unwrap();
            for (name, resid) in lat.validate() {
                let tol = match name {
                    "e1-e2 vs 4K^2" => 1e-10,
                    "half-period values, theta vs K-form" => 1e-10,
                    "eta1, theta vs K-form" => 1e-10,
                    _ => 1e-12,
                };
                assert!(resid < tol, "{name} residual {resid} at tau {tau}");
            }
        }
    }

    #[test]
    fn frozen_invariants_at_1_2i() {
        // Independent 40-digit oracle values.
        let lat = lattice_from_tau(C64::new(0.0, 1.2), &pol()).unwrap();
        assert!(rel(lat.g2, C64::new(146.52525630386692825, 0.0)) < 1e-13);
        assert!(rel(lat.g3, C64::new(207.20749914583928579, 0.0)) < 1e-13);
        assert!(rel(lat.t, C64::new(0.30866259982042108040, 0.0)) < 1e-13);
    }

    #[test]
    fn half_period_values() {
        for tau in [C64::new(0.0, 1.0), C64::new(0.0, 1.2), C64::new(0.3, 1.1)] {
            let lat = lattice_from_tau(tau, &pol()).unwrap();
            let escale = lat.e1.norm();
            assert!((lat.wp(C64::new(0.5, 0.0)).unwrap() - lat.e1).norm() < 1e-11 * escale);
            assert!((lat.wp(tau / 2.0).unwrap() - lat.e2).norm() < 1e-11 * escale);
            assert!(
                (lat.wp((C64::new(1.0, 0.0) + tau) / 2.0).unwrap() - lat.e3).norm()
                    < 1e-11 * escale
            );
        }
    }

    #[test]
    fn cubic_identity_and_parity() {
        let lat = lattice_from_tau(C64::new(0.3, 1.1), &pol()).unwrap();
        for z in [
            C64::new(0.21, 0.34),
            C64::new(-0.17, 0.12),
            C64::new(0.45, -0.2),
        ] {
            let v = lat.weierstrass(z).unwrap();
            let lhs = v.wp_prime * v.wp_prime;
            let rhs = 4.0 * v.wp.powu(3) - lat.g2 * v.wp - lat.g3;
            assert!(rel(lhs, rhs) < 1e-10, "cubic identity at {z}");
            let w = lat.weierstrass(-z).unwrap();
            assert!(rel(w.wp, v.wp) < 1e-11);
            assert!(rel(w.zeta, -v.zeta) < 1e-10);
        }
    }

    #[test]
    fn zeta_quasi_periodicity() {
        let lat = lattice_from_tau(C64::new(0.0, 1.2), &pol()).unwrap();
        for z in [C64::new(0.13, 0.22), C64::new(-0.31, 0.41)] {
            let a = lat.weierstrass(z).unwrap().zeta;
            let b = lat.weierstrass(z + 1.0).unwrap().zeta;
            assert!((b - a - lat.eta1_shift).norm() < 1e-11 * lat.eta1_shift.norm());
            let c = lat.weierstrass(z + lat.tau).unwrap().zeta;
            assert!((c - a - lat.eta2_shift).norm() < 1e-11 * lat.eta2_shift.norm());
        }
    }

    #[test]
    fn laurent_leading_term() {
        let lat = lattice_from_tau(C64::new(0.0, 1.0), &pol()).unwrap();
        let z = C64::new(1e-3, 0.0);
        let wp = lat.wp(z).unwrap();
        assert!((z * z * wp - C64::new(1.0, 0.0)).norm() < 1e-5);
        // The theta and Laurent branches agree where they meet.
        let z = C64::new(1.1e-3, 0.4e-3);
        let wp_theta = lat.wp(z).unwrap();
        let z2 = C64::new(0.9e-3, 0.3e-3);
        let wp_laurent = lat.wp(z2).unwrap();
        let cubic = |w: C64, dp: C64| (dp * dp - (4.0 * w.powu(3) - lat.g2 * w - lat.g3)).norm();
        let vt = lat.weierstrass(z).unwrap();
        let vl = lat.weierstrass(z2).unwrap();
        assert!(cubic(wp_theta, vt.wp_prime) < 1e-6 * wp_theta.norm().powi(3));
        assert!(cubic(wp_laurent, vl.wp_prime) < 1e-6 * wp_laurent.norm().powi(3));
    }

    #[test]
    fn lattice_point_rejected() {
        let lat = lattice_from_tau(C64::new(0.0, 1.2), &pol()).unwrap();
        let z = C64::new(1.0, 0.0) + lat.tau;
        assert!(matches!(
            lat.weierstrass(z),
            Err(EopError::LatticePoint { .. })
        ));
    }

    #[test]
    fn duplication_consistency() {
        let lat = lattice_from_tau(C64::new(0.0, 1.2), &pol()).unwrap();
        let mut checked = 0;
        for i in 0..50 {
            let x = -0.45 + 0.9 * (i as f64 * 0.618033988749) % 0.9;
            let y = -0.55 + 1.1 * ((i as f64 * 0.414213562) % 1.0);
            let z = C64::new(x, y * lat.tau.im / 1.2);
            let v = match lat.weierstrass(z) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let direct = match lat.wp(2.0 * z) {
                Ok(w) => w,
                Err(_) => continue,
            };
            if v.wp_prime.norm() < 1e-3 {
                continue;
            }
            let dup = lat.wp_duplication(v.wp, v.wp_prime);
            assert!(rel(direct, dup) < 1e-9, "duplication at {z}");
            checked += 1;
        }
        assert!(checked > 30);
    }

    #[test]
    fn lattice_determinism() {
        let a = lattice_from_tau(C64::new(0.3, 1.1), &pol()).unwrap();
        let b = lattice_from_tau(C64::new(0.3, 1.1), &pol()).unwrap();
        assert_eq!(a.g2, b.g2);
        assert_eq!(a.g3, b.g3);
        assert_eq!(a.eta1_half, b.eta1_half);
        assert_eq!(a.big_k, b.big_k);
    }

    #[test]
    fn ke_special_values_and_legendre() {
        let (k0, e0) = elliptic_ke(C64::new(0.0, 0.0)).unwrap();
        assert!((k0 - C64::new(PI / 2.0, 0.0)).norm() < 1e-15);
        assert!((e0 - C64::new(PI / 2.0, 0.0)).norm() < 1e-15);
        for t in [0.3, 0.5, 0.77] {
            let (k, e) = elliptic_ke(C64::new(t, 0.0)).unwrap();
            let (kc, ec) = elliptic_ke(C64::new(1.0 - t, 0.0)).unwrap();
            let legendre = e * kc + ec * k - k * kc;
            assert!((legendre - C64::new(PI / 2.0, 0.0)).norm() < 1e-12);
        }
        assert!(matches!(
            elliptic_ke(C64::new(1.5, 0.0)),
            Err(EopError::BranchCut)
        ));
    }

    #[test]
    fn ke_against_defining_integral() {
        // Independent oracle: 2000-point trapezoid on the defining integrals.
        let m = 0.5f64;
        let n = 2000;
        let mut k_sum = 0.0;
        let mut e_sum = 0.0;
        for i in 0..n {
            let th = (i as f64 + 0.5) * (PI / 2.0) / n as f64;
            let root = (1.0 - m * th.sin().powi(2)).sqrt();
            k_sum += 1.0 / root;
            e_sum += root;
        }
        k_sum *= PI / 2.0 / n as f64;
        e_sum *= PI / 2.0 / n as f64;
        let (k, e) = elliptic_ke(C64::new(m, 0.0)).unwrap();
        assert!((k.re - k_sum).abs() < 1e-6);
        assert!((e.re - e_sum).abs() < 1e-6);
    }

    #[test]
    fn e1_minus_e2_is_4k_squared_at_i() {
        let lat = lattice_from_tau(C64::new(0.0, 1.0), &pol()).unwrap();
        let (k, _) = elliptic_ke(C64::new(0.5, 0.0)).unwrap();
        assert!(rel(lat.e1 - lat.e2, 4.0 * k * k) < 1e-10);
    }

    #[test]
    fn tau_t_round_trip() {
        for t in [0.2, 0.5, 0.71] {
            let tau = tau_from_t(C64::new(t, 0.0)).unwrap();
            let lat = lattice_from_tau(tau, &pol()).unwrap();
            assert!((lat.t - C64::new(t, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn t_scalars_match_lattice() {
        let lat = lattice_from_tau(C64::new(0.0, 1.2), &pol()).unwrap();
        let sc = lattice_scalars_from_t(lat.t).unwrap();
        assert!(rel(sc.g2, lat.g2) < 1e-12);
        assert!(rel(sc.g3, lat.g3) < 1e-12);
        assert!(rel(sc.eta1, lat.eta1_half) < 1e-12);
        assert!(rel(sc.e3, lat.e3) < 1e-11);
    }
}
