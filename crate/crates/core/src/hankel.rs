//! Hankel determinants of power moments, bordered determinants, the
//! checkerboard moment determinant and the norm ladder.
//!
//! Indexing follows the degree sequence of the elliptic polynomials
//! `{0, 2, 3, 4, ...}` (no degree one exists):
//!
//! * `Delta_{2k}` — k x k Hankel determinant of the even moments
//!   `m_0 .. m_{2k-2}`,
//! * `Delta_{2k+3}` — k x k Hankel determinant of the odd basis moments
//!   `mu_{2i+3,2j+3} = o_{i+j}/4`,
//! * `D_n` — determinant of the full checkerboard moment matrix `S_n`,
//!   which factorises as `D_n = Delta_n Delta_{n+1}`,
//! * `h_n = D_{n+1}/D_n = Delta_{n+2}/Delta_n` — squared norms.
//!
//! Determinants use LU with partial pivoting and are capped at dimension
//! 10; beyond that Hankel conditioning in binary64 returns noise, which is
//! worse than a refusal.

use crate::error::{EopError, Result};
use crate::linalg::lu_det;
use crate::moments::MomentTable;
use crate::C64;

/// Scale-aware singularity threshold on the LU pivot ratio: a pivot more
/// than `1e13` below the largest one means the matrix is at (numerical)
/// rank deficiency. Healthy checkerboard matrices keep this ratio under
/// ~1e4 through dimension 9, while a tau at a determinant zero sends it
/// past 1e15, so the gap is wide. (A row-norm-product scale would not
/// work here: the Hadamard ratio of a healthy Hankel determinant itself
/// decays below 1e-13 by dimension 8.)
pub const SINGULAR_FACTOR: f64 = 1e-13;

fn row_norm_scale(matrix: &[Vec<C64>]) -> f64 {
    matrix
        .iter()
        .map(|row| row.iter().map(|c| c.norm()).sum::<f64>().max(1e-300))
        .product()
}

/// Determinant plus condition estimate and the row-norm scale.
#[derive(Clone, Copy, Debug)]
pub struct DetValue {
    pub value: C64,
    /// Pivot-ratio condition estimate `max|u_ii| / min|u_ii|`.
    pub cond: f64,
    /// Product of row norms (reported with the determinant; diagnostic).
    pub scale: f64,
}

impl DetValue {
    pub fn is_singular(&self) -> bool {
        self.value.norm() == 0.0 || self.cond > 1.0 / SINGULAR_FACTOR
    }
}

fn det_of(matrix: &[Vec<C64>]) -> Result<DetValue> {
    let (value, cond) = lu_det(matrix)?;
    Ok(DetValue {
        value,
        cond,
        scale: row_norm_scale(matrix),
    })
}

/// Even-moment Hankel matrix for `Delta_{2k}` (k x k, entries `m_{i+j}`).
fn even_matrix(table: &MomentTable, k: usize) -> Result<Vec<Vec<C64>>> {
    (0..k)
        .map(|i| (0..k).map(|j| table.even(i + j)).collect())
        .collect()
}

/// Odd-moment Hankel matrix for `Delta_{2k+3}` (entries `o_{i+j}/4`).
fn odd_matrix(table: &MomentTable, k: usize) -> Result<Vec<Vec<C64>>> {
    (0..k)
        .map(|i| (0..k).map(|j| table.odd(i + j).map(|o| o / 4.0)).collect())
        .collect()
}

/// Hankel determinant `Delta_index` over the degree sequence
/// `{0, 2, 3, 4, ...}`. `Delta_0 = Delta_2 = Delta_3 = 1`.
pub fn delta(index: usize, table: &MomentTable) -> Result<DetValue> {
    if index == 1 {
        return Err(EopError::InvalidBasisIndex { index: 1 });
    }
    let matrix = if index % 2 == 0 {
        even_matrix(table, index / 2)?
    } else {
        odd_matrix(table, (index - 3) / 2)?
    };
    det_of(&matrix)
}

/// Bordered determinants `(Gamma_{2k}, Lambda_{2k})`: the k x k minors of
/// the k x (k+1) even-moment matrix with column `k-1` (resp. `k-2`)
/// deleted. They carry the sub-leading coefficients of the even
/// polynomials: the `wp^{k-1}` coefficient is `-Gamma/Delta` and the
/// `wp^{k-2}` coefficient is `+Lambda/Delta`.
pub fn bordered(index: usize, table: &MomentTable) -> Result<(C64, C64)> {
    if index % 2 != 0 {
        return Err(EopError::InvalidBasisIndex { index });
    }
    let k = index / 2;
    let zero = C64::new(0.0, 0.0);
    let gamma = if k == 0 {
        zero
    } else {
        let cols: Vec<usize> = (0..=k).filter(|&j| j != k - 1).collect();
        let m: Vec<Vec<C64>> = (0..k)
            .map(|i| {
                cols.iter()
                    .map(|&j| table.even(i + j))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        det_of(&m)?.value
    };
    let lambda = if k < 2 {
        zero
    } else {
        let cols: Vec<usize> = (0..=k).filter(|&j| j != k - 2).collect();
        let m: Vec<Vec<C64>> = (0..k)
            .map(|i| {
                cols.iter()
                    .map(|&j| table.even(i + j))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        det_of(&m)?.value
    };
    Ok((gamma, lambda))
}

/// Bordered determinant of the odd family: same column-deletion pattern on
/// the `o_{i+j}/4` matrix; carries the subleading coefficient of the odd
/// polynomials.
pub fn bordered_odd(index: usize, table: &MomentTable) -> Result<C64> {
    if index < 3 || index % 2 == 0 {
        return Err(EopError::InvalidBasisIndex { index });
    }
    let k = (index - 3) / 2;
    if k == 0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let cols: Vec<usize> = (0..=k).filter(|&j| j != k - 1).collect();
    let m: Vec<Vec<C64>> = (0..k)
        .map(|i| {
            cols.iter()
                .map(|&j| table.odd(i + j).map(|o| o / 4.0))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    Ok(det_of(&m)?.value)
}

/// Assemble the checkerboard moment matrix `S_n` over basis indices
/// `{0, 2, ..., n-1}`.
pub fn moment_matrix(n: usize, table: &MomentTable) -> Result<Vec<Vec<C64>>> {
    let idx: Vec<usize> = basis_indices_below(n);
    idx.iter()
        .map(|&i| idx.iter().map(|&j| table.mixed(i, j)).collect())
        .collect()
}

/// Basis indices `{0, 2, 3, ..., n-1}`.
pub fn basis_indices_below(n: usize) -> Vec<usize> {
    (0..n).filter(|&i| i != 1).collect()
}

/// Checkerboard determinant `D_n = det S_n`, `2 <= n <= 9`.
pub fn checkerboard_d(n: usize, table: &MomentTable) -> Result<DetValue> {
    if !(2..=9).contains(&n) {
        return Err(EopError::DepthExceeded { dim: n, max: 9 });
    }
    det_of(&moment_matrix(n, table)?)
}

/// Norm `h_n = Delta_{n+2} / Delta_n` over the degree sequence.
pub fn norm_h(n: usize, table: &MomentTable) -> Result<C64> {
    if n == 1 {
        return Err(EopError::InvalidBasisIndex { index: 1 });
    }
    let num = delta(n + 2, table)?;
    let den = delta(n, table)?;
    if den.is_singular() {
        return Err(EopError::SingularLadder {
            det_abs: den.value.norm(),
            scale: SINGULAR_FACTOR * den.scale,
        });
    }
    Ok(num.value / den.value)
}

/// Previous degree in the sequence `{0, 2, 3, 4, ...}`.
pub fn prev_degree(n: usize) -> usize {
    match n {
        0 | 1 => panic!("degree {n} has no predecessor in the sequence"),
        2 => 0,
        _ => n - 1,
    }
}

/// Squared norm by direct quadrature of the polynomial, for cross-checks.
pub fn norm_h_quadrature(
    table: &MomentTable,
    poly: &crate::polynomials::EllipticPolynomial,
) -> Result<C64> {
    crate::moments::contour_quadrature(
        |z| match poly.eval(z, &table.lat) {
            Ok(x) => x * x,
            Err(_) => C64::new(f64::NAN, 0.0),
        },
        &table.lat,
        &table.weight,
        table.quadrature_tol(),
    )
}

/// Full ladder of determinants and norms with condition estimates.
#[derive(Clone, Debug)]
pub struct HankelLadder {
    /// `Delta_{2k}` for `k = 0..=k_max`.
    pub delta_even: Vec<C64>,
    /// `Delta_{2k+3}` for `k = 0..` (as far as the table allows).
    pub delta_odd: Vec<C64>,
    /// `Gamma_{2k}`.
    pub gamma: Vec<C64>,
    /// `Lambda_{2k}`.
    pub lambda: Vec<C64>,
    /// `h_n` keyed by degree `n` in `{0, 2, 3, ...}`.
    pub h: Vec<(usize, C64)>,
    /// Condition estimates for the even determinants.
    pub cond_even: Vec<f64>,
}

impl HankelLadder {
    pub fn build(table: &MomentTable, k_max: usize) -> Result<HankelLadder> {
        let mut delta_even = Vec::new();
        let mut cond_even = Vec::new();
        let mut gamma = Vec::new();
        let mut lambda = Vec::new();
        for k in 0..=k_max {
            let d = delta(2 * k, table)?;
            delta_even.push(d.value);
            cond_even.push(d.cond);
            let (g, l) = bordered(2 * k, table)?;
            gamma.push(g);
            lambda.push(l);
            log::debug!("Delta_{} cond estimate {:.3e}", 2 * k, d.cond);
        }
        let mut delta_odd = Vec::new();
        for k in 0..=k_max {
            match delta(2 * k + 3, table) {
                Ok(d) => delta_odd.push(d.value),
                Err(EopError::MissingMoments { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        let mut h = Vec::new();
        let top = 2 * k_max;
        for n in (0..top).filter(|&n| n != 1) {
            match norm_h(n, table) {
                Ok(v) => h.push((n, v)),
                Err(EopError::MissingMoments { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        Ok(HankelLadder {
            delta_even,
            delta_odd,
            gamma,
            lambda,
            h,
            cond_even,
        })
    }

    pub fn h_at(&self, n: usize) -> Option<C64> {
        self.h.iter().find(|(m, _)| *m == n).map(|(_, v)| *v)
    }
}
