//! Acceptance suite: one test per criterion, each printing a pass line
//! with its worst residual. Run with `--nocapture` to see the table:
//!
//! `cargo test -p eop --test acceptance -- --nocapture`

use eop::elliptic::{elliptic_ke, lattice_from_tau, tau_from_t, LatticeData, TruncationPolicy};
use eop::moments::{even_moment, MomentTable, Weight};
use eop::polynomials::{assemble_y, assemble_y_even, build_pi};
use eop::recurrences::{
    self, coefficient_equations, cubic_relation_residual, extend_by_recursion, ladder_direct,
    ProbeSet, RecurrenceLadder,
};
use eop::{hankel, painleve, scan, C64};
use std::collections::BTreeMap;

const TAUS: [C64; 3] = [C64::new(0.0, 1.0), C64::new(0.0, 1.2), C64::new(0.3, 1.1)];

fn policy() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn lat(tau: C64) -> LatticeData {
    lattice_from_tau(tau, &policy()).unwrap()
}

fn table(tau: C64, j_max: usize) -> MomentTable {
    MomentTable::by_recursion_exact_seeds(lat(tau), j_max).unwrap()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn pass(criterion: usize, name: &str, worst: f64, tol: f64) {
    assert!(
        worst <= tol,
        "criterion {criterion} ({name}): residual {worst:.3e} above {tol:.1e}"
    );
    println!(
        "criterion {criterion:2} ({name}): PASS  (worst residual {worst:.3e}, tolerance {tol:.1e})"
    );
}

#[test]
fn criterion_01_special_function_layer() {
    let mut worst: f64 = 0.0;
    for tau in TAUS {
        let lat = lat(tau);
        // cubic identity at interior probes
        for z in [
            C64::new(0.21, 0.33),
            C64::new(-0.17, 0.12),
            C64::new(0.4, -0.22),
        ] {
            let v = lat.weierstrass(z).unwrap();
            let lhs = v.wp_prime * v.wp_prime;
            let rhs = 4.0 * v.wp.powu(3) - lat.g2 * v.wp - lat.g3;
            worst = worst.max((lhs - rhs).norm() / rhs.norm());
        }
        // half-period values
        let escale = lat.e1.norm().max(lat.e2.norm()).max(lat.e3.norm());
        worst = worst.max((lat.wp(C64::new(0.5, 0.0)).unwrap() - lat.e1).norm() / escale);
        worst = worst.max((lat.wp(tau / 2.0).unwrap() - lat.e2).norm() / escale);
        worst =
            worst.max((lat.wp((C64::new(1.0, 0.0) + tau) / 2.0).unwrap() - lat.e3).norm() / escale);
        // Legendre relation for the lambda value of this lattice
        let (k, e) = (lat.big_k, lat.big_e);
        let (kc, ec) = elliptic_ke(C64::new(1.0, 0.0) - lat.t).unwrap();
        let legendre = e * kc + ec * k - k * kc;
        worst = worst
            .max((legendre - C64::new(std::f64::consts::PI / 2.0, 0.0)).norm() / legendre.norm());
        // both eta1 formulas
        let eta_k = 2.0 / 3.0 * k * ((lat.t - 2.0) * k + 3.0 * e);
        worst = worst.max(rel(lat.eta1_half, eta_k));
    }
    pass(1, "special functions", worst, 1e-10);
}

#[test]
fn criterion_02_moments() {
    let mut worst: f64 = 0.0;
    for tau in [C64::new(0.0, 1.0), C64::new(0.0, 1.1)] {
        let t = table(tau, 10);
        let scale: f64 = (0..=10)
            .map(|j| t.even(j).unwrap().norm())
            .fold(0.0, f64::max);
        for j in 0..=10usize {
            let q = even_moment(j, &t.lat, &Weight::One, 1e-12).unwrap();
            worst = worst.max((q - t.even(j).unwrap()).norm() / scale.max(q.norm()));
        }
    }
    let t = table(C64::new(0.0, 1.0), 4);
    let mut value_worst = rel(t.even(0).unwrap(), C64::new(1.0, 0.0));
    value_worst = value_worst.max(rel(t.even(1).unwrap(), -2.0 * t.lat.eta1_half));
    value_worst = value_worst.max(rel(t.even(2).unwrap(), t.lat.g2 / 12.0));
    assert!(
        value_worst < 1e-9,
        "listed moment values: {value_worst:.3e}"
    );
    pass(2, "moments: quadrature vs recursion", worst, 1e-10);
}

#[test]
fn criterion_03_hankel_determinants() {
    let t13 = table(C64::new(0.0, 1.3), 12);
    let (g2, g3, e) = (t13.lat.g2, t13.lat.g3, t13.lat.eta1_half);
    let d4 = hankel::delta(4, &t13).unwrap().value;
    let w4 = rel(d4, (g2 - 48.0 * e * e) / 12.0);
    assert!(w4 < 1e-9, "Delta_4 closed form: {w4:.3e}");
    let d6 = hankel::delta(6, &t13).unwrap().value;
    let d6_closed = (25.0 * g2.powu(3) - 378.0 * g3 * g3 + 108.0 * g2 * g3 * e
        - 1872.0 * g2 * g2 * e * e
        + 43200.0 * g3 * e.powu(3))
        / 37800.0;
    let w6 = rel(d6, d6_closed);
    assert!(w6 < 1e-8, "Delta_6 closed form: {w6:.3e}");

    let mut worst: f64 = 0.0;
    let ti = table(C64::new(0.0, 1.0), 18);
    for n in 2..=9usize {
        let d = hankel::checkerboard_d(n, &ti).unwrap().value;
        let dd = hankel::delta(n, &ti).unwrap().value * hankel::delta(n + 1, &ti).unwrap().value;
        worst = worst.max(rel(d, dd));
    }
    let t12 = table(C64::new(0.0, 1.2), 8);
    let h2 = hankel::norm_h(2, &t12).unwrap();
    let wh = rel(
        h2,
        -4.0 * t12.lat.eta1_half * t12.lat.eta1_half + t12.lat.g2 / 12.0,
    );
    assert!(wh < 1e-9, "h_2 closed form: {wh:.3e}");
    pass(3, "Hankel determinants and factorisation", worst, 1e-9);
}

#[test]
fn criterion_04_orthogonality() {
    let mut gram_worst: f64 = 0.0;
    let mut ratio_worst: f64 = 0.0;
    // The ratio identity is additionally checked off the imaginary axis.
    {
        let t = table(C64::new(0.3, 1.1), 18);
        for n in (0..=8usize).filter(|&n| n != 1) {
            let h = hankel::norm_h(n, &t).unwrap();
            let p = build_pi(n, &t).unwrap();
            let quad = hankel::norm_h_quadrature(&t, &p).unwrap();
            ratio_worst = ratio_worst.max(rel(h, quad));
        }
    }
    for tau in [C64::new(0.0, 1.0), C64::new(0.0, 1.2)] {
        let t = table(tau, 18);
        let degrees: Vec<usize> = (0..=8).filter(|&n| n != 1).collect();
        let polys: Vec<_> = degrees.iter().map(|&n| build_pi(n, &t).unwrap()).collect();
        let mut diag: f64 = 0.0;
        let mut off: f64 = 0.0;
        for (a, pa) in polys.iter().enumerate() {
            for (b, pb) in polys.iter().enumerate().skip(a) {
                let ip = eop::moments::contour_quadrature(
                    |z| match (pa.eval(z, &t.lat), pb.eval(z, &t.lat)) {
                        (Ok(x), Ok(y)) => x * y,
                        _ => C64::new(f64::NAN, 0.0),
                    },
                    &t.lat,
                    &t.weight,
                    1e-12,
                )
                .unwrap();
                if a == b {
                    diag = diag.max(ip.norm());
                } else {
                    off = off.max(ip.norm());
                }
            }
        }
        gram_worst = gram_worst.max(off / diag);
        for &n in &degrees {
            let h = hankel::norm_h(n, &t).unwrap();
            let p = build_pi(n, &t).unwrap();
            let quad = hankel::norm_h_quadrature(&t, &p).unwrap();
            ratio_worst = ratio_worst.max(rel(h, quad));
        }
    }
    assert!(ratio_worst < 1e-8, "norm ratio identity: {ratio_worst:.3e}");
    pass(4, "orthogonality (Gram + norm ratios)", gram_worst, 1e-8);
}

#[test]
fn criterion_05_determinant_lemmas() {
    let t = table(C64::new(0.0, 1.0), 20);
    let probes = ProbeSet::seeded(&t.lat, 20260810, 20);
    let extraction = ProbeSet::deterministic(&t.lat);
    let mut worst: f64 = 0.0;
    for n in 3..=7usize {
        let alpha = recurrences::alpha_from_det(n, &t, &extraction).unwrap();
        let y = assemble_y(n, &t).unwrap();
        for &z in &probes.0 {
            let m = y.eval(z, &t).unwrap();
            let resid = (m.det() - t.lat.wp(z).unwrap() - alpha).norm();
            worst = worst.max(resid);
        }
    }
    for k in 1..=3usize {
        let y = assemble_y_even(k, &t).unwrap();
        for &z in &probes.0 {
            let m = y.eval(z, &t).unwrap();
            let wp_prime = t.lat.weierstrass(z).unwrap().wp_prime;
            worst = worst.max((m.det() + wp_prime / 2.0).norm());
        }
    }
    pass(5, "determinant lemmas for Y_n and Y_2k", worst, 1e-7);
}

#[test]
fn criterion_06_recurrence_ladder() {
    let t12 = table(C64::new(0.0, 1.2), 20);
    let probes = ProbeSet::deterministic(&t12.lat);
    let ladder12 = ladder_direct(7, &t12, &probes).unwrap();
    let (g2, g3, e) = (t12.lat.g2, t12.lat.g3, t12.lat.eta1_half);
    let a3 = (3.0 * g3 - 4.0 * g2 * e) / (g2 - 48.0 * e * e);
    let a4 = (5.0 * g2.powu(3) - 108.0 * g3 * g3 + 108.0 * g2 * g3 * e - 432.0 * g2 * g2 * e * e
        + 8640.0 * g3 * e.powu(3))
        / (18.0 * (3.0 * g3 - 4.0 * g2 * e) * (g2 - 48.0 * e * e));
    let closed = rel(ladder12.alpha(3).unwrap(), a3).max(rel(ladder12.alpha(4).unwrap(), a4));
    assert!(closed < 1e-8, "alpha_3/alpha_4 closed forms: {closed:.3e}");

    // recursed vs direct
    let trimmed = RecurrenceLadder {
        alphas: ladder12
            .alphas
            .iter()
            .filter(|(&n, _)| n <= 4)
            .map(|(&n, &v)| (n, v))
            .collect(),
        ..ladder12.clone()
    };
    let recursed = extend_by_recursion(&trimmed, 6).unwrap();
    let mut rec_worst: f64 = 0.0;
    for n in [5usize, 6] {
        rec_worst = rec_worst.max(rel(recursed.alpha(n).unwrap(), ladder12.alpha(n).unwrap()));
    }
    assert!(rec_worst < 1e-6, "recursed alphas: {rec_worst:.3e}");

    // cubic relation, three-term, one-step, compatibility at tau = i
    let ti = table(C64::new(0.0, 1.0), 20);
    let ladder = ladder_direct(8, &ti, &ProbeSet::deterministic(&ti.lat)).unwrap();
    let mut cubic_worst: f64 = 0.0;
    for n in 4..=7usize {
        cubic_worst = cubic_worst.max(cubic_relation_residual(n, &ladder).unwrap());
    }
    assert!(cubic_worst < 1e-8, "cubic relation: {cubic_worst:.3e}");

    let mut polys = BTreeMap::new();
    for n in (0..=8).filter(|&n| n != 1) {
        polys.insert(n, build_pi(n, &ti).unwrap());
    }
    let z = C64::new(0.3, 0.275);
    let r3 = recurrences::three_term_residual(4, z, &ladder, &polys).unwrap();
    let r1 = recurrences::one_step_residual(4, z, &ladder, &polys).unwrap();
    assert!(r3 < 1e-8 && r1 < 1e-8, "recurrences: {r3:.3e}, {r1:.3e}");

    let mut compat_worst: f64 = 0.0;
    for (n, zp) in [(4usize, C64::new(0.25, 0.3)), (5, C64::new(-0.21, 0.27))] {
        let (r, l) = recurrences::lax_matrices(n, zp, &ladder).unwrap();
        let scale = r.norm_max() * l.norm_max();
        compat_worst =
            compat_worst.max(recurrences::compatibility_residual(n, zp, &ladder).unwrap() / scale);
    }
    // the coefficient equations at n = 4 back the same condition
    let qs = coefficient_equations(4, &ladder).unwrap();
    for q in qs {
        assert!(
            q.norm() < 1e-7 * ti.lat.g2.norm(),
            "coefficient equation {q}"
        );
    }
    pass(
        6,
        "recurrence ladder and matrix systems",
        compat_worst,
        1e-6,
    );
}

#[test]
fn criterion_07_even_lax_and_fuchsian() {
    let t = table(C64::new(0.0, 1.0), 16);
    let mut lax_worst: f64 = 0.0;
    for k in [1usize, 2] {
        let lax = painleve::even_lax(k, &t).unwrap();
        let y = assemble_y_even(k, &t).unwrap();
        for z in [C64::new(0.23, 0.19), C64::new(-0.31, 0.27)] {
            let y_val = y.eval(z, &t).unwrap();
            let y_prime = eop::diff::ring_derivative_mat(|w| y.eval(w, &t).unwrap(), z, 1e-2, 8);
            let rhs = lax.l_at(z).unwrap().mul(&y_val);
            lax_worst = lax_worst.max(y_prime.sub(&rhs).norm_max() / rhs.norm_max().max(1.0));
        }
    }
    assert!(lax_worst < 1e-6, "even Lax residual: {lax_worst:.3e}");

    let mut mono_worst: f64 = 0.0;
    for k in 1..=3usize {
        let lax = painleve::even_lax(k, &t).unwrap();
        let (at_half, at_origin) = lax.monodromy_exponents();
        for th in at_half {
            mono_worst = mono_worst.max((th - C64::new(0.5, 0.0)).norm());
        }
        mono_worst =
            mono_worst.max((at_origin - C64::new((4.0 * k as f64 - 3.0) / 2.0, 0.0)).norm());
    }
    assert!(mono_worst < 1e-8, "monodromy exponents: {mono_worst:.3e}");

    let mut fuchs_worst: f64 = 0.0;
    for (k, tval) in [(1usize, 0.5f64), (2, 0.37)] {
        let tau = tau_from_t(C64::new(tval, 0.0)).unwrap();
        let tbl = table(tau, 16);
        let f = painleve::fuchsian(k, tval, &tbl).unwrap();
        let sum = f.a[0].add(&f.a[1]).add(&f.a[2]);
        let want = -f.theta0 / 2.0;
        fuchs_worst = fuchs_worst.max((sum.0[0][0] - C64::new(want, 0.0)).norm());
        fuchs_worst = fuchs_worst.max((sum.0[1][1] + C64::new(want, 0.0)).norm());
        fuchs_worst = fuchs_worst.max(sum.0[0][1].norm()).max(sum.0[1][0].norm());
        for a in &f.a {
            fuchs_worst = fuchs_worst.max((a.det() + C64::new(1.0 / 16.0, 0.0)).norm());
        }
    }
    pass(7, "even Lax pair, monodromy, Fuchsian", fuchs_worst, 1e-8);
}

#[test]
fn criterion_08_painleve_solutions() {
    let t_grid: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let mut pvi_worst_k01: f64 = 0.0;
    let mut pvi_worst_k2: f64 = 0.0;
    for &t in &t_grid {
        pvi_worst_k01 = pvi_worst_k01.max(painleve::pvi_residual(0, t).unwrap());
        pvi_worst_k01 = pvi_worst_k01.max(painleve::pvi_residual(1, t).unwrap());
        pvi_worst_k2 = pvi_worst_k2.max(painleve::pvi_residual(2, t).unwrap());
    }
    assert!(
        pvi_worst_k01 < 1e-6,
        "PVI residual k=0,1: {pvi_worst_k01:.3e}"
    );
    assert!(pvi_worst_k2 < 1e-5, "PVI residual k=2: {pvi_worst_k2:.3e}");

    let mut zeta0_worst: f64 = 0.0;
    for &t in &t_grid {
        let (z0, _) = painleve::zeta_and_derivative(0, t).unwrap();
        zeta0_worst = zeta0_worst.max((z0 - C64::new((2.0 * t - 1.0) / 8.0, 0.0)).norm());
    }
    assert!(zeta0_worst < 1e-12, "zeta_0 closed form: {zeta0_worst:.3e}");

    let mut sigma_worst: f64 = 0.0;
    for k in [0usize, 1, 2] {
        for &t in &[0.15, 0.3, 0.5, 0.7, 0.85] {
            sigma_worst = sigma_worst.max(painleve::sigma_residual(k, *&t).unwrap());
        }
    }
    assert!(sigma_worst < 1e-5, "sigma-form residual: {sigma_worst:.3e}");

    let mut hitchin_worst: f64 = 0.0;
    for &t in &[0.3, 0.5, 0.7] {
        let u = painleve::u_of_t(1, t).unwrap();
        let h = painleve::u1_from_wp_q(t).unwrap();
        hitchin_worst = hitchin_worst.max(rel(u, h));
    }
    pass(
        8,
        "Painleve VI solutions and sigma form",
        hitchin_worst,
        1e-7,
    );
}

#[test]
fn criterion_09_tau_recursion_constants() {
    let grid = [0.3, 0.4, 0.5, 0.6, 0.7];
    let ladder = painleve::tau_and_sk(5, &grid).unwrap();
    let want = [-3.0, 525.0, 6237.0, 27885.0, 82365.0];
    let mut worst: f64 = 0.0;
    for (s, w) in ladder.s.iter().zip(want) {
        let tol = if s.k <= 2 { 1e-6 } else { 1e-4 };
        let gap = rel(s.value, C64::new(w, 0.0));
        assert!(gap < tol, "s_{} = {} vs {w} (gap {gap:.3e})", s.k, s.value);
        assert!(s.spread < 1e-4, "s_{} spread {:.3e}", s.k, s.spread);
        worst = worst.max(s.spread);
    }
    pass(9, "tau recursion constants s_1..s_5", worst, 1e-4);
}

#[test]
fn criterion_10_zero_scan() {
    let cfg = scan::ScanConfig {
        re_min: -0.63,
        re_max: 0.63,
        im_min: 0.13,
        im_max: 0.42,
        n_re: 24,
        n_im: 12,
        indices: vec![4],
        ..scan::ScanConfig::default()
    };
    let hits = scan::scan_zeros(&cfg).unwrap();
    assert!(!hits.is_empty(), "no zeros found");
    let mut worst: f64 = 0.0;
    for h in &hits {
        let lt = lat(h.tau);
        worst = worst.max((lt.g2 - 48.0 * lt.eta1_half * lt.eta1_half).norm() / lt.g2.norm());
        // mirror symmetry
        let mirrored = C64::new(-h.tau.re, h.tau.im);
        let best = hits
            .iter()
            .map(|o| (o.tau - mirrored).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(
            best < cfg.dedupe_radius.max(1e-6),
            "mirror of {} missing",
            h.tau
        );
    }
    // refinement stability
    let mut fine = cfg.clone();
    fine.n_re *= 2;
    fine.n_im *= 2;
    let fine_hits = scan::scan_zeros(&fine).unwrap();
    let interior = |h: &scan::ZeroHit| h.tau.re.abs() < 0.6 && h.tau.im > 0.15 && h.tau.im < 0.4;
    assert_eq!(
        hits.iter().filter(|h| interior(h)).count(),
        fine_hits.iter().filter(|h| interior(h)).count(),
        "zero count changed under grid refinement"
    );
    pass(10, "determinant zero scan", worst, 1e-8);
}
