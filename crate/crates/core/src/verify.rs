//! All-up verification: every module's invariant suite, run against one
//! configuration, with a machine-readable report.
//!
//! A suite that cannot run because the chosen tau sits at a determinant
//! zero is reported as `SingularExpected` rather than a failure — that is
//! the designed behaviour at those points, not a defect.

use crate::elliptic::{lattice_from_tau, LatticeData, TruncationPolicy};
use crate::error::{EopError, Result};
use crate::hankel;
use crate::moments::{even_moment, MomentTable, Weight};
use crate::polynomials::{build_pi, series_c2, series_c2_tilde};
use crate::recurrences::{
    coefficient_equations, cubic_relation_residual, extend_by_recursion, ladder_direct, ProbeSet,
    RecurrenceLadder,
};
use crate::{painleve, C64};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub tau: C64,
    pub seed: u64,
    /// Per-suite tolerance overrides, keyed by suite name.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            tau: C64::new(0.0, 1.0),
            seed: 7,
            tolerances: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SuiteStatus {
    Pass,
    Fail,
    /// The configuration sits at a determinant zero; the suite cannot run
    /// and that outcome is expected there.
    SingularExpected,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub status: SuiteStatus,
    pub max_residual: f64,
    pub tolerance: f64,
    pub details: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub tau: (f64, f64),
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub all_passed: bool,
}

struct Ctx {
    lat: LatticeData,
    table: MomentTable,
    seed: u64,
}

type SuiteFn = fn(&Ctx) -> Result<(f64, Vec<String>)>;

fn suite_list() -> Vec<(&'static str, f64, SuiteFn)> {
    vec![
        ("elliptic-periodicity", 1e-10, s_elliptic_periodicity),
        ("elliptic-duplication", 1e-9, s_elliptic_duplication),
        ("elliptic-determinism", 0.5, s_elliptic_determinism),
        ("moments-parity", 1e-10, s_moments_parity),
        ("moments-symmetry", 0.5, s_moments_symmetry),
        ("moments-recursion", 1e-10, s_moments_recursion),
        ("hankel-ratio-consistency", 1e-8, s_hankel_ratios),
        ("hankel-symmetry", 1e-9, s_hankel_symmetry),
        ("poly-orthogonality", 1e-8, s_poly_orthogonality),
        ("poly-parity", 1e-10, s_poly_parity),
        ("poly-series-constraints", 1e-8, s_poly_constraints),
        ("recur-direct-vs-recursed", 1e-6, s_recur_recursed),
        ("recur-cubic-relation", 1e-8, s_recur_cubic),
        ("recur-coefficient-equations", 1e-7, s_recur_q),
        ("painleve-sigma-form", 1e-5, s_painleve_sigma),
        ("painleve-branch-continuity", 0.5, s_painleve_continuity),
        ("painleve-theta0", 1e-14, s_painleve_theta0),
    ]
}

/// Names of every suite, in run order.
pub fn suite_names() -> Vec<&'static str> {
    suite_list().into_iter().map(|(n, _, _)| n).collect()
}

/// Run every suite; failures are collected, never short-circuited.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    if cfg.tau.im <= 0.0 {
        return Err(EopError::InvalidInput(format!(
            "verification needs Im tau > 0, got {}",
            cfg.tau
        )));
    }
    let policy = TruncationPolicy::default();
    let lat = lattice_from_tau(cfg.tau, &policy)?;
    let table = MomentTable::by_recursion_exact_seeds(lat, 20)?;
    let ctx = Ctx {
        lat,
        table,
        seed: cfg.seed,
    };
    let mut suites = Vec::new();
    for (name, default_tol, f) in suite_list() {
        let tolerance = cfg.tolerances.get(name).copied().unwrap_or(default_tol);
        let result = match f(&ctx) {
            Ok((max_residual, details)) => SuiteResult {
                name: name.to_string(),
                status: if max_residual <= tolerance {
                    SuiteStatus::Pass
                } else {
                    SuiteStatus::Fail
                },
                max_residual,
                tolerance,
                details,
            },
            Err(e @ (EopError::SingularLadder { .. } | EopError::SingularMomentMatrix)) => {
                SuiteResult {
                    name: name.to_string(),
                    status: SuiteStatus::SingularExpected,
                    max_residual: f64::NAN,
                    tolerance,
                    details: vec![format!("singular configuration: {e}")],
                }
            }
            Err(e) => SuiteResult {
                name: name.to_string(),
                status: SuiteStatus::Fail,
                max_residual: f64::NAN,
                tolerance,
                details: vec![format!("error: {e}")],
            },
        };
        suites.push(result);
    }
    let all_passed = suites.iter().all(|s| s.status != SuiteStatus::Fail);
    Ok(VerifyReport {
        tau: (cfg.tau.re, cfg.tau.im),
        seed: cfg.seed,
        suites,
        all_passed,
    })
}

fn probe_points(ctx: &Ctx, count: usize) -> Vec<C64> {
    ProbeSet::seeded(&ctx.lat, ctx.seed, count).0
}

fn s_elliptic_periodicity(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let mut worst: f64 = 0.0;
    for z in probe_points(ctx, 8) {
        let base = ctx.lat.wp(z)?;
        for shift in [C64::new(1.0, 0.0), ctx.lat.tau] {
            let moved = ctx.lat.wp(z + shift)?;
            worst = worst.max((moved - base).norm() / base.norm().max(1.0));
        }
    }
    Ok((worst, vec![]))
}

fn s_elliptic_duplication(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for z in probe_points(ctx, 80) {
        if used >= 50 {
            break;
        }
        let v = match ctx.lat.weierstrass(z) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if v.wp_prime.norm() < 1e-3 {
            continue;
        }
        let direct = match ctx.lat.wp(2.0 * z) {
            Ok(w) => w,
            Err(_) => continue,
        };
        let dup = ctx.lat.wp_duplication(v.wp, v.wp_prime);
        worst = worst.max((direct - dup).norm() / direct.norm().max(1.0));
        used += 1;
    }
    Ok((worst, vec![format!("{used} duplication probes")]))
}

fn s_elliptic_determinism(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let policy = TruncationPolicy::default();
    let again = lattice_from_tau(ctx.lat.tau, &policy)?;
    let identical = again.g2 == ctx.lat.g2
        && again.g3 == ctx.lat.g3
        && again.eta1_half == ctx.lat.eta1_half
        && again.big_k == ctx.lat.big_k;
    Ok((
        if identical { 0.0 } else { 1.0 },
        vec!["bit-identical rebuild".into()],
    ))
}

fn s_moments_parity(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let scale: f64 = (0..=6)
        .map(|j| ctx.table.even(j).map(|m| m.norm()).unwrap_or(0.0))
        .fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for i in [0usize, 2, 4, 6, 8] {
        for j in [3usize, 5, 7, 9] {
            worst = worst.max(ctx.table.mixed(i, j)?.norm() / scale);
        }
    }
    Ok((worst, vec![]))
}

fn s_moments_symmetry(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    for i in [0usize, 2, 3, 4, 5] {
        for j in [0usize, 2, 3, 4, 5] {
            if ctx.table.mixed(i, j)? != ctx.table.mixed(j, i)? {
                return Ok((1.0, vec![format!("asymmetry at ({i}, {j})")]));
            }
        }
    }
    Ok((0.0, vec![]))
}

fn s_moments_recursion(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let scale: f64 = (0..=10)
        .map(|j| ctx.table.even(j).map(|m| m.norm()).unwrap_or(0.0))
        .fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for j in 0..=10usize {
        let q = even_moment(j, &ctx.lat, &Weight::One, 1e-12)?;
        let r = ctx.table.even(j)?;
        worst = worst.max((q - r).norm() / scale.max(q.norm()));
    }
    Ok((worst, vec![]))
}

fn s_hankel_ratios(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let mut worst: f64 = 0.0;
    for n in (0..=8usize).filter(|&n| n != 1) {
        let h = hankel::norm_h(n, &ctx.table)?;
        let p = build_pi(n, &ctx.table)?;
        let quad = hankel::norm_h_quadrature(&ctx.table, &p)?;
        worst = worst.max((h - quad).norm() / h.norm().max(1e-300));
    }
    Ok((worst, vec![]))
}

fn s_hankel_symmetry(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let policy = TruncationPolicy::default();
    let mirror = lattice_from_tau(C64::new(-ctx.lat.tau.re, ctx.lat.tau.im), &policy)?;
    let shifted = lattice_from_tau(ctx.lat.tau + 2.0, &policy)?;
    let t_m = MomentTable::by_recursion_exact_seeds(mirror, 10)?;
    let t_s = MomentTable::by_recursion_exact_seeds(shifted, 10)?;
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for k in [2usize, 3] {
        let a = hankel::delta(2 * k, &ctx.table)?;
        if a.is_singular() {
            // Both members of a symmetric pair vanish here; comparing
            // noise against noise says nothing. The zero-location
            // symmetry itself is the scanner's check.
            details.push(format!("Delta_{} is at a zero; skipped", 2 * k));
            continue;
        }
        let b = hankel::delta(2 * k, &t_m)?.value;
        let c = hankel::delta(2 * k, &t_s)?.value;
        worst = worst.max((b - a.value.conj()).norm() / a.value.norm());
        worst = worst.max((c - a.value).norm() / a.value.norm());
    }
    Ok((worst, details))
}

fn s_poly_orthogonality(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let degrees: Vec<usize> = (0..=8).filter(|&n| n != 1).collect();
    let polys: Vec<_> = degrees
        .iter()
        .map(|&n| build_pi(n, &ctx.table))
        .collect::<Result<_>>()?;
    let lat = ctx.lat;
    let mut diag_max: f64 = 0.0;
    let mut off_max: f64 = 0.0;
    for (a, pa) in polys.iter().enumerate() {
        for (b, pb) in polys.iter().enumerate().skip(a) {
            let ip = crate::moments::contour_quadrature(
                |z| match (pa.eval(z, &lat), pb.eval(z, &lat)) {
                    (Ok(x), Ok(y)) => x * y,
                    _ => C64::new(f64::NAN, 0.0),
                },
                &lat,
                &ctx.table.weight,
                1e-12,
            )?;
            if a == b {
                diag_max = diag_max.max(ip.norm());
            } else {
                off_max = off_max.max(ip.norm());
            }
        }
    }
    Ok((
        off_max / diag_max.max(1e-300),
        vec![format!("largest diagonal entry {diag_max:.3e}")],
    ))
}

fn s_poly_parity(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let p6 = build_pi(6, &ctx.table)?;
    let p5 = build_pi(5, &ctx.table)?;
    let mut worst: f64 = 0.0;
    for z in probe_points(ctx, 6) {
        let even_gap = p6.eval(-z, &ctx.lat)? - p6.eval(z, &ctx.lat)?;
        let odd_gap = p5.eval(-z, &ctx.lat)? + p5.eval(z, &ctx.lat)?;
        let scale = p6.eval(z, &ctx.lat)?.norm().max(1.0);
        worst = worst
            .max(even_gap.norm() / scale)
            .max(odd_gap.norm() / scale);
    }
    Ok((worst, vec![]))
}

fn s_poly_constraints(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let mut worst: f64 = 0.0;
    for n in 3..=7usize {
        let pn = build_pi(n, &ctx.table)?;
        let pm = build_pi(n - 1, &ctx.table)?;
        let c2n = series_c2(&pn, &ctx.lat)?;
        let h_prev = hankel::norm_h(n - 1, &ctx.table)?;
        let ct_prev = series_c2_tilde(&pm, h_prev, &ctx.table)?;
        let beta = hankel::norm_h(n, &ctx.table)? / h_prev;
        let nf = n as f64;
        let cons1 = nf * ct_prev + (nf - 2.0) * c2n + (nf - 1.0) * beta;
        let scale = beta.norm().max(c2n.norm()).max(1.0);
        worst = worst.max(cons1.norm() / scale);
        // The determinant constraint pairs degrees (n, n-2); degree 1 does
        // not exist, so it starts at n = 4.
        if n >= 4 {
            let pm2 = build_pi(n - 2, &ctx.table)?;
            let h_prev2 = hankel::norm_h(n - 2, &ctx.table)?;
            let ct_prev2 = series_c2_tilde(&pm2, h_prev2, &ctx.table)?;
            let cons2 = c2n + ct_prev2;
            worst = worst.max(cons2.norm() / scale);
        }
    }
    Ok((worst, vec![]))
}

fn ladder_for(ctx: &Ctx, n_max: usize) -> Result<RecurrenceLadder> {
    let probes = ProbeSet::seeded(&ctx.lat, ctx.seed, 5);
    ladder_direct(n_max, &ctx.table, &probes)
}

fn s_recur_recursed(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let direct = ladder_for(ctx, 7)?;
    let trimmed = RecurrenceLadder {
        alphas: direct
            .alphas
            .iter()
            .filter(|(&n, _)| n <= 4)
            .map(|(&n, &v)| (n, v))
            .collect(),
        ..direct.clone()
    };
    let recursed = extend_by_recursion(&trimmed, 7)?;
    let mut worst: f64 = 0.0;
    for n in 5..=7usize {
        let a = direct.alpha(n)?;
        let b = recursed.alpha(n)?;
        worst = worst.max((a - b).norm() / a.norm().max(1.0));
    }
    Ok((worst, vec![]))
}

fn s_recur_cubic(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let ladder = ladder_for(ctx, 8)?;
    let mut worst: f64 = 0.0;
    for n in 4..=7usize {
        worst = worst.max(cubic_relation_residual(n, &ladder)?);
    }
    Ok((worst, vec![]))
}

fn s_recur_q(ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let ladder = ladder_for(ctx, 7)?;
    let qs = coefficient_equations(4, &ladder)?;
    let scale = ctx.lat.g2.norm();
    let worst = qs.iter().map(|q| q.norm() / scale).fold(0.0, f64::max);
    Ok((worst, vec![]))
}

fn s_painleve_sigma(_ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let mut worst: f64 = 0.0;
    for k in [0usize, 1, 2] {
        for t in [0.15, 0.3, 0.5, 0.7, 0.85] {
            worst = worst.max(painleve::sigma_residual(k, t)?);
        }
    }
    Ok((worst, vec!["k in 0..=2 on a 5-point grid".into()]))
}

fn s_painleve_continuity(_ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    // Sweep u_k over [0.1, 0.9]; a branch jump would show as a step far
    // above the local Lipschitz estimate.
    let mut details = Vec::new();
    let mut worst: f64 = 0.0;
    for k in [0usize, 1, 2] {
        let n = 33;
        let mut us = Vec::with_capacity(n);
        for i in 0..n {
            let t = 0.1 + 0.8 * i as f64 / (n - 1) as f64;
            us.push(painleve::u_of_t(k, t)?);
        }
        let mut steps: Vec<f64> = us.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = steps[steps.len() / 2].max(1e-12);
        let max = steps.last().copied().unwrap_or(0.0);
        details.push(format!("k = {k}: max step {max:.3e}, median {median:.3e}"));
        worst = worst.max(max / (10.0 * median));
    }
    Ok((worst, details))
}

fn s_painleve_theta0(_ctx: &Ctx) -> Result<(f64, Vec<String>)> {
    let mut worst: f64 = 0.0;
    for k in 0..=5usize {
        let (a, b) = painleve::theta0_conventions(k);
        worst = worst.max((a.abs() - b.abs()).abs());
    }
    Ok((worst, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_all_pass() {
        let report = run_verify(&VerifyConfig::default()).unwrap();
        for s in &report.suites {
            assert_eq!(
                s.status,
                SuiteStatus::Pass,
                "suite {} failed with residual {} (tol {}): {:?}",
                s.name,
                s.max_residual,
                s.tolerance,
                s.details
            );
        }
        assert!(report.all_passed);
    }

    #[test]
    fn singular_tau_reported_as_expected() {
        // A refined zero of the first even determinant; ladder-based
        // suites must surface it as an expected singularity, not a failure.
        let cfg = VerifyConfig {
            tau: C64::new(0.5, 0.24104474304794885),
            ..VerifyConfig::default()
        };
        let report = run_verify(&cfg).unwrap();
        assert!(report
            .suites
            .iter()
            .any(|s| s.status == SuiteStatus::SingularExpected));
        assert!(report.all_passed, "singular tau must not count as failure");
    }

    #[test]
    fn tolerance_override_can_force_failure() {
        let mut cfg = VerifyConfig::default();
        cfg.tolerances
            .insert("elliptic-periodicity".to_string(), 1e-30);
        let report = run_verify(&cfg).unwrap();
        assert!(!report.all_passed);
    }

    #[test]
    fn invalid_tau_rejected() {
        let cfg = VerifyConfig {
            tau: C64::new(0.0, -1.0),
            ..VerifyConfig::default()
        };
        assert!(run_verify(&cfg).is_err());
    }
}
