//! Small dense complex linear algebra: 2x2 matrices and LU with partial
//! pivoting for the moment matrices (dimension is capped at 10 well before
//! double precision gives out on Hankel conditioning).

use crate::error::{EopError, Result};
use crate::scalar::CScalar;
use crate::C64;

/// Dimension cap for determinants and solves in binary64.
pub const MAX_DIM: usize = 10;

/// LU factorisation (partial pivoting) of a square matrix, in place.
/// Returns the permutation sign and a crude condition estimate
/// max|u_ii| / min|u_ii|.
fn lu_in_place<S: CScalar>(a: &mut [Vec<S>]) -> (f64, f64, bool) {
    let n = a.len();
    let mut sign = 1.0;
    let mut max_piv: f64 = 0.0;
    let mut min_piv = f64::INFINITY;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col][col].norm();
        for row in col + 1..n {
            let v = a[row][col].norm();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if piv != col {
            a.swap(col, piv);
            sign = -sign;
        }
        let diag = a[col][col];
        let dnorm = diag.norm();
        max_piv = max_piv.max(dnorm);
        min_piv = min_piv.min(dnorm);
        if dnorm == 0.0 {
            return (sign, f64::INFINITY, false);
        }
        for row in col + 1..n {
            let factor = a[row][col] / diag;
            a[row][col] = factor;
            for k in col + 1..n {
                let sub = factor * a[col][k];
                a[row][k] = a[row][k] - sub;
            }
        }
    }
    let cond = if min_piv > 0.0 {
        max_piv / min_piv
    } else {
        f64::INFINITY
    };
    (sign, cond, true)
}

/// Determinant by LU with partial pivoting, plus a condition estimate.
pub fn lu_det<S: CScalar>(matrix: &[Vec<S>]) -> Result<(S, f64)> {
    let n = matrix.len();
    if n == 0 {
        return Ok((S::from_f64(1.0), 1.0));
    }
    if n > MAX_DIM {
        return Err(EopError::DepthExceeded {
            dim: n,
            max: MAX_DIM,
        });
    }
    let mut a: Vec<Vec<S>> = matrix.to_vec();
    let (sign, cond, ok) = lu_in_place(&mut a);
    let mut det = S::from_f64(sign);
    if !ok {
        return Ok((S::from_f64(0.0), f64::INFINITY));
    }
    for i in 0..n {
        det = det * a[i][i];
    }
    Ok((det, cond))
}

/// Solve `A x = b` by LU with partial pivoting.
pub fn lu_solve(matrix: &[Vec<C64>], b: &[C64]) -> Result<Vec<C64>> {
    let n = matrix.len();
    if n > MAX_DIM {
        return Err(EopError::DepthExceeded {
            dim: n,
            max: MAX_DIM,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // Augment so row swaps carry the right-hand side along.
    let mut a: Vec<Vec<C64>> = matrix
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(*rhs);
            r
        })
        .collect();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col][col].norm();
        for row in col + 1..n {
            let v = a[row][col].norm();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return Err(EopError::SingularMomentMatrix);
        }
        a.swap(col, piv);
        let diag = a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / diag;
            for k in col..=n {
                let sub = factor * a[col][k];
                a[row][k] -= sub;
            }
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = a[row][n];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// 2x2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn zero() -> Self {
        Mat2([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub fn identity() -> Self {
        let mut m = Mat2::zero();
        m.0[0][0] = C64::new(1.0, 0.0);
        m.0[1][1] = C64::new(1.0, 0.0);
        m
    }

    pub fn diag(a: C64, d: C64) -> Self {
        let mut m = Mat2::zero();
        m.0[0][0] = a;
        m.0[1][1] = d;
        m
    }

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let mut r = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j];
            }
        }
        r
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        let mut r = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] = self.0[i][j] + o.0[i][j];
            }
        }
        r
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        let mut r = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] = self.0[i][j] - o.0[i][j];
            }
        }
        r
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] *= s;
            }
        }
        r
    }

    pub fn inv(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        Some(Mat2::new(
            self.0[1][1] / d,
            -self.0[0][1] / d,
            -self.0[1][0] / d,
            self.0[0][0] / d,
        ))
    }

    /// Largest entry magnitude.
    pub fn norm_max(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues from the characteristic quadratic.
    pub fn eigenvalues(&self) -> (C64, C64) {
        let tr = self.trace();
        let disc = (tr * tr - 4.0 * self.det()).sqrt();
        ((tr + disc) / 2.0, (tr - disc) / 2.0)
    }

    /// Commutator `[self, o]`.
    pub fn commutator(&self, o: &Mat2) -> Mat2 {
        self.mul(o).sub(&o.mul(self))
    }
}
