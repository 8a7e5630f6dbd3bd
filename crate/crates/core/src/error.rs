//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EopError {
    #[error("nome modulus {abs_q} exceeds the truncation policy bound {max}")]
    NomeTooLarge { abs_q: f64, max: f64 },

    #[error("{what} did not converge within the allowed number of terms")]
    NonConvergent { what: &'static str },

    #[error("argument reduces onto the period lattice (distance {dist:.3e})")]
    LatticePoint { dist: f64 },

    #[error("parameter lies on the branch cut [1, inf) of the complete elliptic integrals")]
    BranchCut,

    #[error("moment recursion requires the constant weight")]
    WeightNotConstant,

    #[error("basis index {index} does not exist (no degree-one elliptic polynomial)")]
    InvalidBasisIndex { index: usize },

    #[error("determinant depth {dim} exceeds the double-precision guard ({max})")]
    DepthExceeded { dim: usize, max: usize },

    #[error("moment table holds {have} {parity} moments, need index {need}")]
    MissingMoments {
        parity: &'static str,
        have: usize,
        need: usize,
    },

    #[error(
        "Hankel ladder is singular at this tau (|det| = {det_abs:.3e} below scale {scale:.3e})"
    )]
    SingularLadder { det_abs: f64, scale: f64 },

    #[error("moment matrix is singular at this tau")]
    SingularMomentMatrix,

    #[error("evaluation point is within {dist:.3e} of the orthogonality contour")]
    TooCloseToContour { dist: f64 },

    #[error("coefficient matrix has a pole here: |wp(z) + alpha_n| = {fn_abs:.3e}")]
    PoleOfSystem { fn_abs: f64 },

    #[error("recurrence denominator vanishes (|den| = {den_abs:.3e})")]
    SingularRecurrence { den_abs: f64 },

    #[error("degenerate solution value: u is within 1e-10 of {{0, 1, t}}")]
    DegenerateU,

    #[error("recursion constant s_{k} is not constant across the grid (spread {spread:.3e})")]
    NonConstantS { k: usize, spread: f64 },

    #[error("the two solution formulas disagree by {gap:.3e}")]
    FormulaMismatch { gap: f64 },

    #[error("fractional power base approaches the principal branch cut")]
    BranchAmbiguity,

    #[error("probe values for a constant spread by {spread:.3e}, above {tol:.3e}")]
    ProbeSpread { spread: f64, tol: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, EopError>;
