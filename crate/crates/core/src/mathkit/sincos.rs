//! Reduction recursion for `∫_0^u sin^α(x) cos^β(x) dx`.
//!
//! Integrating by parts once gives
//!
//! ```text
//! ∫_0^u sin^α cos^β = sin^{α+1}(u) cos^{β+1}(u) / (α+1)
//!                    + (α+β+2)/(α+1) · ∫_0^u sin^{α+2} cos^β
//! ```
//!
//! and `k` further applications peel off `k+1` boundary terms.

use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinCosParams {
    /// Sine exponent.
    pub alpha: f64,
    /// Cosine exponent.
    pub beta: f64,
    /// Upper limit, in `[0, π/2)`.
    pub upper: f64,
    /// Number of extra reduction steps.
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinCosExpansion {
    /// `T_1, …, T_{k+1}`.
    pub boundary_terms: Vec<f64>,
    /// `R_k`, the multiplier of `∫_0^u sin^{α+2k+2} cos^β`.
    pub remainder_coefficient: f64,
}

impl SinCosExpansion {
    pub fn boundary_sum(&self) -> f64 {
        super::neumaier_sum(self.boundary_terms.iter().copied())
    }
}

/// Runs the recursion `k` times.
///
/// `T_j = Π_{i<j}(α+β+2i) / Π_{i≤j}(α+2i−1) · sin^{α+2j−1}(u) cos^{β+1}(u)`
/// and `R_k = Π_{i≤k+1}(α+β+2i) / Π_{i≤k+1}(α+2i−1)`.
pub fn sincos_recursion(params: SinCosParams) -> Result<SinCosExpansion> {
    let SinCosParams { alpha, beta, upper, k } = params;
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::domain("sine and cosine exponents must be finite"));
    }
    if !(0.0..FRAC_PI_2).contains(&upper) {
        return Err(Error::domain(format!("upper limit must lie in [0, π/2), got {upper}")));
    }
    if (beta + 1.0).abs() < DEGENERATE_TOL {
        return Err(Error::DegenerateParameter("cosine exponent −1".into()));
    }
    let terms = k as usize + 1;
    let (s, c) = upper.sin_cos();
    let cos_factor = c.powf(beta + 1.0);
    let mut coefficient = 1.0;
    let mut boundary_terms = Vec::with_capacity(terms);
    for j in 1..=terms {
        let denom = alpha + 2.0 * j as f64 - 1.0;
        if denom.abs() < DEGENERATE_TOL {
            return Err(Error::DegenerateParameter(format!(
                "denominator α+{} vanishes for α = {alpha}",
                2 * j - 1
            )));
        }
        coefficient /= denom;
        let term = if upper == 0.0 { 0.0 } else { coefficient * s.powf(denom) * cos_factor };
        boundary_terms.push(term);
        coefficient *= alpha + beta + 2.0 * j as f64;
    }
    Ok(SinCosExpansion { boundary_terms, remainder_coefficient: coefficient })
}
