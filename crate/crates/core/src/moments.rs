//! Weighted power moments along the contour `[tau/2, tau/2 + 1]`.
//!
//! Internally everything is indexed by the wp-power: `m_j = int wp^j w dz`
//! for the even family and `o_j = int (wp')^2 wp^j w dz` for the odd family
//! (stored without the 1/4 that the odd basis normalisation contributes to
//! mixed moments). For the constant weight the even family satisfies
//!
//! `(8k+12) m_{k+2} = (2k+1) g2 m_k + 2k g3 m_{k-1}`
//!
//! and the odd family is determined algebraically by the cubic:
//! `o_j = 4 m_{j+3} - g2 m_{j+1} - g3 m_j`.

use crate::elliptic::LatticeData;
use crate::error::{EopError, Result};
use crate::quad::integrate_01;
use crate::scalar::CScalar;
use crate::C64;
use std::sync::Arc;

/// Depth guard on requested wp-powers.
pub const MAX_POWER: usize = 24;

/// Weight function on the contour, sampled by arclength parameter
/// `s in [0, 1]` at `z = tau/2 + s`.
#[derive(Clone)]
pub enum Weight {
    /// `w(z) = 1`.
    One,
    /// User-supplied evaluator; `parity_even` asserts symmetry about the
    /// contour midpoint.
    Custom {
        evaluator: Arc<dyn Fn(f64) -> C64 + Send + Sync>,
        parity_even: bool,
    },
}

impl std::fmt::Debug for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Weight::One => write!(f, "Weight::One"),
            Weight::Custom { parity_even, .. } => {
                write!(f, "Weight::Custom {{ parity_even: {parity_even} }}")
            }
        }
    }
}

impl Weight {
    pub fn eval(&self, s: f64) -> C64 {
        match self {
            Weight::One => C64::new(1.0, 0.0),
            Weight::Custom { evaluator, .. } => evaluator(s),
        }
    }

    pub fn is_constant_one(&self) -> bool {
        matches!(self, Weight::One)
    }

    /// Build a custom weight; a claimed even parity is checked on 16
    /// sample pairs around the midpoint.
    pub fn custom(
        evaluator: Arc<dyn Fn(f64) -> C64 + Send + Sync>,
        parity_even: bool,
    ) -> Result<Weight> {
        if parity_even {
            for i in 0..16 {
                let x = (i as f64 + 0.5) / 33.0;
                let a = evaluator(0.5 + x);
                let b = evaluator(0.5 - x);
                if (a - b).norm() > 1e-10 * (a.norm() + b.norm() + 1.0) {
                    return Err(EopError::InvalidInput(format!(
                        "weight claims even parity but samples at 0.5 +/- {x} differ"
                    )));
                }
            }
        }
        Ok(Weight::Custom {
            evaluator,
            parity_even,
        })
    }
}

/// How a moment entry was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentSource {
    Quadrature,
    Recursion,
}

/// Table of even and odd power moments for one `(tau, weight)` pair.
#[derive(Clone, Debug)]
pub struct MomentTable {
    pub lat: LatticeData,
    pub weight: Weight,
    even: Vec<C64>,
    odd: Vec<C64>,
    even_source: Vec<MomentSource>,
    tol: f64,
}

/// Integrate `f(z) w(z)` along the contour.
pub fn contour_quadrature<F: Fn(C64) -> C64>(
    f: F,
    lat: &LatticeData,
    weight: &Weight,
    tol: f64,
) -> Result<C64> {
    if tol < 1e-14 {
        return Err(EopError::InvalidInput(format!(
            "contour quadrature tolerance {tol} below 1e-14"
        )));
    }
    let half_tau = lat.tau / 2.0;
    integrate_01(|s| f(half_tau + s) * weight.eval(s), tol)
}

fn even_integrand(lat: &LatticeData, j: usize) -> impl Fn(C64) -> C64 + '_ {
    move |z| match lat.wp(z) {
        Ok(wp) => wp.powu(j as u32),
        Err(_) => C64::new(f64::NAN, 0.0),
    }
}

impl MomentTable {
    /// Quadrature-built table: `even` up to `m_{even_max}`, `odd` up to
    /// `o_{odd_max}`.
    pub fn by_quadrature(
        lat: LatticeData,
        weight: Weight,
        even_max: usize,
        odd_max: usize,
        tol: f64,
    ) -> Result<MomentTable> {
        if even_max > MAX_POWER || odd_max > MAX_POWER {
            return Err(EopError::DepthExceeded {
                dim: even_max.max(odd_max),
                max: MAX_POWER,
            });
        }
        let mut even = Vec::with_capacity(even_max + 1);
        for j in 0..=even_max {
            even.push(contour_quadrature(
                even_integrand(&lat, j),
                &lat,
                &weight,
                tol,
            )?);
        }
        let mut odd = Vec::with_capacity(odd_max + 1);
        for j in 0..=odd_max {
            odd.push(contour_quadrature(
                |z| match lat.weierstrass(z) {
                    Ok(v) => v.wp_prime * v.wp_prime * v.wp.powu(j as u32),
                    Err(_) => C64::new(f64::NAN, 0.0),
                },
                &lat,
                &weight,
                tol,
            )?);
        }
        let n = even.len();
        Ok(MomentTable {
            lat,
            weight,
            even,
            odd,
            even_source: vec![MomentSource::Quadrature; n],
            tol,
        })
    }

    /// Extend by the constant-weight recursion to even index `j_max`; odd
    /// entries are recomputed algebraically from the even ones. Requires at
    /// least the two seed moments.
    pub fn extend_by_recursion(&self, j_max: usize) -> Result<MomentTable> {
        if !self.weight.is_constant_one() {
            return Err(EopError::WeightNotConstant);
        }
        if self.even.len() < 2 {
            return Err(EopError::MissingMoments {
                parity: "even",
                have: self.even.len(),
                need: 2,
            });
        }
        if j_max > MAX_POWER {
            return Err(EopError::DepthExceeded {
                dim: j_max,
                max: MAX_POWER,
            });
        }
        let mut even = self.even.clone();
        let mut source = self.even_source.clone();
        let seeds = [even[0], even[1]];
        let filled = recursion_fill(self.lat.g2, self.lat.g3, &seeds, j_max);
        for (j, v) in filled.into_iter().enumerate() {
            if j >= even.len() {
                even.push(v);
                source.push(MomentSource::Recursion);
            }
        }
        let odd: Vec<C64> = if j_max >= 3 {
            (0..=j_max - 3)
                .map(|j| 4.0 * even[j + 3] - self.lat.g2 * even[j + 1] - self.lat.g3 * even[j])
                .collect()
        } else {
            Vec::new()
        };
        Ok(MomentTable {
            lat: self.lat,
            weight: self.weight.clone(),
            even,
            odd,
            even_source: source,
            tol: self.tol,
        })
    }

    /// Constant-weight table built entirely from closed-form seeds plus the
    /// recursion: `m_0 = 1` (contour length) and `m_1 = -eta1_shift`
    /// (telescoped zeta increment). No quadrature; used by the scanners and
    /// t-pipelines where thousands of tables are needed.
    pub fn by_recursion_exact_seeds(lat: LatticeData, j_max: usize) -> Result<MomentTable> {
        if j_max > MAX_POWER {
            return Err(EopError::DepthExceeded {
                dim: j_max,
                max: MAX_POWER,
            });
        }
        let seeds = [C64::new(1.0, 0.0), -lat.eta1_shift];
        let even = recursion_fill(lat.g2, lat.g3, &seeds, j_max);
        let odd: Vec<C64> = if j_max >= 3 {
            (0..=j_max - 3)
                .map(|j| 4.0 * even[j + 3] - lat.g2 * even[j + 1] - lat.g3 * even[j])
                .collect()
        } else {
            Vec::new()
        };
        let n = even.len();
        Ok(MomentTable {
            lat,
            weight: Weight::One,
            even,
            odd,
            even_source: vec![MomentSource::Recursion; n],
            tol: 1e-12,
        })
    }

    pub fn quadrature_tol(&self) -> f64 {
        self.tol
    }

    pub fn even_len(&self) -> usize {
        self.even.len()
    }

    pub fn odd_len(&self) -> usize {
        self.odd.len()
    }

    pub fn even_source(&self, j: usize) -> Option<MomentSource> {
        self.even_source.get(j).copied()
    }

    /// `m_j = int wp^j w dz`.
    pub fn even(&self, j: usize) -> Result<C64> {
        self.even.get(j).copied().ok_or(EopError::MissingMoments {
            parity: "even",
            have: self.even.len(),
            need: j,
        })
    }

    /// `o_j = int (wp')^2 wp^j w dz`.
    pub fn odd(&self, j: usize) -> Result<C64> {
        self.odd.get(j).copied().ok_or(EopError::MissingMoments {
            parity: "odd",
            have: self.odd.len(),
            need: j,
        })
    }

    /// Mixed moment of two basis elements, by basis index. Index `1` does
    /// not exist. Even x odd products vanish identically for the constant
    /// weight; for custom weights they are integrated directly.
    pub fn mixed(&self, i: usize, j: usize) -> Result<C64> {
        if i == 1 || j == 1 {
            return Err(EopError::InvalidBasisIndex {
                index: if i == 1 { i } else { j },
            });
        }
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match (lo % 2, hi % 2) {
            (0, 0) => self.even(lo / 2 + hi / 2),
            (1, 1) => Ok(self.odd((lo - 3) / 2 + (hi - 3) / 2)? / 4.0),
            _ => {
                let (ev, od) = if lo % 2 == 0 { (lo, hi) } else { (hi, lo) };
                if self.weight.is_constant_one() {
                    // int wp' wp^l dz telescopes to zero over a full period.
                    return Ok(C64::new(0.0, 0.0));
                }
                let power = ev / 2 + (od - 3) / 2;
                let lat = self.lat;
                contour_quadrature(
                    move |z| match lat.weierstrass(z) {
                        Ok(v) => -0.5 * v.wp_prime * v.wp.powu(power as u32),
                        Err(_) => C64::new(f64::NAN, 0.0),
                    },
                    &self.lat,
                    &self.weight,
                    self.tol,
                )
            }
        }
    }
}

/// Even moment of a single wp-power via quadrature.
pub fn even_moment(j: usize, lat: &LatticeData, weight: &Weight, tol: f64) -> Result<C64> {
    if j > MAX_POWER {
        return Err(EopError::DepthExceeded {
            dim: j,
            max: MAX_POWER,
        });
    }
    contour_quadrature(even_integrand(lat, j), lat, weight, tol)
}

/// Constant-weight even-moment recursion, generic over jets.
pub fn recursion_fill<S: CScalar>(g2: S, g3: S, seeds: &[S; 2], j_max: usize) -> Vec<S> {
    let mut m = Vec::with_capacity(j_max + 1);
    m.push(seeds[0]);
    if j_max == 0 {
        return m;
    }
    m.push(seeds[1]);
    for k in 0..j_max.saturating_sub(1) {
        let kf = k as f64;
        let mut num = g2 * m[k].scale(2.0 * kf + 1.0);
        if k >= 1 {
            num = num + g3 * m[k - 1].scale(2.0 * kf);
        }
        m.push(num.scale(1.0 / (8.0 * kf + 12.0)));
    }
    m
}
