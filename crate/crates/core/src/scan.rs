//! Winding-number zero scanner for Hankel determinants over a rectangle in
//! the modular parameter.
//!
//! Each grid cell gets the discrete winding number of `Delta(tau)` around
//! its boundary (16 samples per edge); cells with nonzero winding seed a
//! Newton refinement from the cell centre. The winding test is robust to
//! close zero pairs and immune to spurious `|Delta|` minima. Per-cell
//! failures are logged and skipped, never fatal.

use crate::elliptic::{lattice_from_tau, TruncationPolicy};
use crate::error::{EopError, Result};
use crate::hankel;
use crate::moments::MomentTable;
use crate::C64;
use rayon::prelude::*;

/// Scanner configuration; defaults reproduce the published window.
#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
    /// Determinant indices over the degree sequence (even: 4, 6, 8, ...;
    /// odd: 5, 7, 9, ...).
    pub indices: Vec<usize>,
    pub newton_tol: f64,
    pub dedupe_radius: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            re_min: -1.0,
            re_max: 1.0,
            im_min: (5.0f64 / 4.0).ln() / std::f64::consts::PI,
            im_max: 2.0,
            n_re: 80,
            n_im: 80,
            indices: vec![4, 6, 8],
            newton_tol: 1e-10,
            dedupe_radius: 1e-6,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.im_min <= 0.0 {
            return Err(EopError::InvalidInput(
                "scan window must stay above the real axis".into(),
            ));
        }
        if self.n_re < 8 || self.n_im < 8 {
            return Err(EopError::InvalidInput(format!(
                "grid {}x{} too coarse (need >= 8 per side)",
                self.n_re, self.n_im
            )));
        }
        if self.re_max <= self.re_min || self.im_max <= self.im_min {
            return Err(EopError::InvalidInput("empty scan window".into()));
        }
        Ok(())
    }
}

/// One refined zero.
#[derive(Clone, Copy, Debug)]
pub struct ZeroHit {
    pub index: usize,
    pub tau: C64,
    pub abs_delta: f64,
    /// Cell that seeded the refinement.
    pub cell: (usize, usize),
    pub winding: i32,
}

/// Constant-weight determinant as a function of the modular parameter
/// (recursion moments; no quadrature, so grids are cheap).
pub fn delta_at(index: usize, tau: C64) -> Result<C64> {
    let policy = TruncationPolicy::default();
    let lat = lattice_from_tau(tau, &policy)?;
    let j_max = if index % 2 == 0 {
        (index.saturating_sub(2)).max(1)
    } else {
        index
    };
    let table = MomentTable::by_recursion_exact_seeds(lat, j_max)?;
    Ok(hankel::delta(index, &table)?.value)
}

fn winding_number(samples: &[C64]) -> Option<i32> {
    let mut total = 0.0;
    for w in 0..samples.len() {
        let a = samples[w];
        let b = samples[(w + 1) % samples.len()];
        if !a.is_finite() || !b.is_finite() || a.norm() == 0.0 || b.norm() == 0.0 {
            return None;
        }
        let step = (b / a).arg();
        // A half-turn per step means the boundary sampling is too coarse
        // to trust.
        if step.abs() > 3.0 {
            return None;
        }
        total += step;
    }
    Some((total / (2.0 * std::f64::consts::PI)).round() as i32)
}

fn newton_refine(index: usize, seed: C64, cell_diag: f64, tol: f64) -> Option<(C64, f64)> {
    let mut z = seed;
    let h = 1e-7;
    for _ in 0..50 {
        let f = delta_at(index, z).ok()?;
        let fp = delta_at(index, z + h).ok()?;
        let fm = delta_at(index, z - h).ok()?;
        let d = (fp - fm) / (2.0 * h);
        if d.norm() == 0.0 {
            return None;
        }
        let step = f / d;
        z -= step;
        // Soundness: a refined zero may not leave its seeding cell by more
        // than one cell diagonal.
        if (z - seed).norm() > 1.5 * cell_diag {
            return None;
        }
        if step.norm() < tol {
            let value = delta_at(index, z).ok()?;
            return Some((z, value.norm()));
        }
    }
    None
}

/// Scan the window for zeros of the requested determinants.
pub fn scan_zeros(cfg: &ScanConfig) -> Result<Vec<ZeroHit>> {
    cfg.validate()?;
    let dre = (cfg.re_max - cfg.re_min) / cfg.n_re as f64;
    let dim = (cfg.im_max - cfg.im_min) / cfg.n_im as f64;
    let cell_diag = (dre * dre + dim * dim).sqrt();
    let per_edge = 16usize;

    let mut hits: Vec<ZeroHit> = Vec::new();
    for &index in &cfg.indices {
        let cells: Vec<(usize, usize)> = (0..cfg.n_re)
            .flat_map(|i| (0..cfg.n_im).map(move |j| (i, j)))
            .collect();
        let mut found: Vec<ZeroHit> = cells
            .par_iter()
            .filter_map(|&(i, j)| {
                let x0 = cfg.re_min + i as f64 * dre;
                let y0 = cfg.im_min + j as f64 * dim;
                // Boundary samples, counterclockwise. A zero sitting on the
                // boundary makes the winding sum unreliable (the argument
                // steps blow up), so retry once on a slightly inflated
                // rectangle that moves the boundary off the zero.
                let walk = |inflate: f64| -> Option<Vec<C64>> {
                    let cx = x0 + dre / 2.0;
                    let cy = y0 + dim / 2.0;
                    let hw = inflate * dre / 2.0;
                    let hh = inflate * dim / 2.0;
                    let mut samples = Vec::with_capacity(4 * per_edge);
                    let mut push = |x: f64, y: f64| -> bool {
                        match delta_at(index, C64::new(x, y)) {
                            Ok(v) => {
                                samples.push(v);
                                true
                            }
                            Err(e) => {
                                log::debug!("cell ({i},{j}) sample failed: {e}");
                                false
                            }
                        }
                    };
                    for s in 0..per_edge {
                        let f = 2.0 * s as f64 / per_edge as f64 - 1.0;
                        if !push(cx + f * hw, cy - hh) {
                            return None;
                        }
                    }
                    for s in 0..per_edge {
                        let f = 2.0 * s as f64 / per_edge as f64 - 1.0;
                        if !push(cx + hw, cy + f * hh) {
                            return None;
                        }
                    }
                    for s in 0..per_edge {
                        let f = 1.0 - 2.0 * s as f64 / per_edge as f64;
                        if !push(cx + f * hw, cy + hh) {
                            return None;
                        }
                    }
                    for s in 0..per_edge {
                        let f = 1.0 - 2.0 * s as f64 / per_edge as f64;
                        if !push(cx - hw, cy + f * hh) {
                            return None;
                        }
                    }
                    Some(samples)
                };
                let (samples, winding) = match walk(1.0).and_then(|s| {
                    let w = winding_number(&s)?;
                    Some((s, w))
                }) {
                    Some(sw) => sw,
                    None => {
                        let s = walk(1.19)?;
                        let w = winding_number(&s)?;
                        (s, w)
                    }
                };
                if winding == 0 {
                    return None;
                }
                let local_scale = samples.iter().map(|c| c.norm()).fold(0.0, f64::max);
                let seed = C64::new(x0 + dre / 2.0, y0 + dim / 2.0);
                let (tau, abs_delta) = newton_refine(index, seed, cell_diag, cfg.newton_tol)?;
                if abs_delta > 1e-10 * local_scale.max(1e-300) {
                    log::debug!(
                        "cell ({i},{j}) refinement left |Delta| = {abs_delta:.3e} above scale"
                    );
                    return None;
                }
                Some(ZeroHit {
                    index,
                    tau,
                    abs_delta,
                    cell: (i, j),
                    winding,
                })
            })
            .collect();
        found.sort_by(|a, b| {
            (a.tau.re, a.tau.im)
                .partial_cmp(&(b.tau.re, b.tau.im))
                .unwrap()
        });
        // Deduplicate refined roots that converged from adjacent cells.
        let mut dedup: Vec<ZeroHit> = Vec::new();
        for hit in found {
            if dedup
                .iter()
                .all(|h| (h.tau - hit.tau).norm() > cfg.dedupe_radius)
            {
                dedup.push(hit);
            }
        }
        hits.extend(dedup);
    }
    hits.sort_by(|a, b| {
        (a.index, a.tau.re, a.tau.im)
            .partial_cmp(&(b.index, b.tau.re, b.tau.im))
            .unwrap()
    });
    Ok(hits)
}
