//! Special functions, log-space numerics and adaptive quadrature.

mod quad;
mod sincos;
mod special;

pub use quad::{quad_adaptive, quad_adaptive_detailed, quad_with_breaks, QuadResult};
pub use sincos::{sincos_recursion, SinCosExpansion, SinCosParams};
pub use special::{
    ball_volume, ball_volume_ratio, log1p_pow, log_ball_volume, log_gamma, neumaier_sum,
};

use crate::{Error, Result};

/// A closed, finite interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::domain(format!("interval bounds must be finite, got [{lo}, {hi}]")));
        }
        if lo > hi {
            return Err(Error::domain(format!("interval lower bound {lo} exceeds upper bound {hi}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Tolerances for [`quad_adaptive`]. Convergence means the summed panel error
/// is at most `max(abs_tol, rel_tol * |result|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections applied to any one panel.
    pub max_depth: u32,
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_depth: u32) -> Result<Self> {
        if !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(Error::domain(format!("rel_tol must be positive, got {rel_tol}")));
        }
        if !(abs_tol >= 0.0) || !abs_tol.is_finite() {
            return Err(Error::domain(format!("abs_tol must be nonnegative, got {abs_tol}")));
        }
        if max_depth == 0 {
            return Err(Error::domain("max_depth must be at least 1"));
        }
        Ok(Self { rel_tol, abs_tol, max_depth })
    }

    /// Relative-only tolerance, for integrals whose scale is unknown and may
    /// be tiny (Orlicz functions deep in their tails).
    pub fn relative(rel_tol: f64) -> Self {
        Self { rel_tol, abs_tol: 0.0, max_depth: 60 }
    }

    /// The same spec with both tolerances divided by `factor`; used for
    /// inner integrals of nested quadrature. The relative tolerance stops at
    /// `100 ε`, below which Gauss–Kronrod error estimates are roundoff.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: (self.rel_tol / factor).max(100.0 * f64::EPSILON),
            abs_tol: self.abs_tol / factor,
            max_depth: self.max_depth,
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-12, max_depth: 60 }
    }
}
