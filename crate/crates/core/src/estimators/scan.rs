use std::collections::BTreeSet;

use super::width::{for_each_projection, WIDTH_SAMPLES};
use super::expected_support_orlicz;
use crate::bodies::{sample_sphere, BodySpec, Direction};
use crate::orlicz::{invert_for_support, OrliczFunction};
use crate::rng::{self, tag};
use crate::{Error, Result};

/// Calibration multiples of the median per-direction estimate.
const UPPER_MULTIPLE: f64 = 4.0;
const LOWER_MULTIPLE: f64 = 0.25;

/// Per-direction estimates of `E h_{K_N}(θ)` and how they sit against the
/// calibrated thresholds `C_1 L_K √log N` and `C_2 L_K √log N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionScan {
    pub n_points: u64,
    pub r: f64,
    pub estimates: Vec<f64>,
    pub median: f64,
    /// Fitted `C_1`: `C_1 L_K √log N` is 4× the median estimate.
    pub c1: f64,
    /// Fitted `C_2`: `C_2 L_K √log N` is 1/4 of the median estimate.
    pub c2: f64,
    pub upper_threshold: f64,
    pub lower_threshold: f64,
    /// Share of directions with estimate `≤ C_1 L_K √log N`.
    pub fraction_upper: f64,
    /// Share of directions with estimate `≥ C_2 L_K √log N`.
    pub fraction_lower: f64,
    /// Shares strictly below the lower threshold, between the thresholds
    /// (inclusive), and strictly above the upper one. These sum to 1.
    pub fraction_below: f64,
    pub fraction_between: f64,
    pub fraction_above: f64,
    /// `1 − N^{−r}`, the predicted measure of the upper-estimate set.
    pub predicted_upper_measure: f64,
    /// `√log N / N^r`, the order (up to `C(r)`) of the lower-estimate set.
    pub predicted_lower_order: f64,
    /// Number of distinct estimate values.
    pub distinct_estimates: usize,
}

/// [`direction_measure_scan_with`] using the default number of projection
/// samples per direction.
pub fn direction_measure_scan(body: &BodySpec, n_points: u64, r: f64, n_dirs: usize, seed: u64) -> Result<DirectionScan> {
    direction_measure_scan_with(body, n_points, r, n_dirs, WIDTH_SAMPLES, seed)
}

/// Estimates `E h_{K_N}(θ)` for `n_dirs` uniform directions (empirical
/// marginals of one shared cloud of `samples` points; the exact coordinate
/// estimate for a Euclidean ball) and reports the measure of the directions
/// satisfying each side of the calibrated estimate.
pub fn direction_measure_scan_with(
    body: &BodySpec,
    n_points: u64,
    r: f64,
    n_dirs: usize,
    samples: usize,
    seed: u64,
) -> Result<DirectionScan> {
    if n_dirs < 1000 {
        return Err(Error::domain(format!("direction scans need at least 1000 directions, got {n_dirs}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("r must be finite and positive, got {r}")));
    }
    if n_points < 2 {
        return Err(Error::domain("N must be at least 2"));
    }
    let l_k = body.isotropic_constant()?;
    let estimates = if body.p() == 2.0 {
        let v = expected_support_orlicz(body, &Direction::canonical(body.n(), 0)?, n_points)?;
        vec![v; n_dirs]
    } else {
        if (samples as u64) < 10 * n_points {
            return Err(Error::Estimation(format!("{samples} projection samples cannot resolve the level 1/{n_points}")));
        }
        let scan_seed = rng::derive(seed, tag::SCAN);
        let dirs = sample_sphere(body.n(), n_dirs, scan_seed)?;
        for_each_projection(body, &dirs, samples, scan_seed, |proj| {
            invert_for_support(&OrliczFunction::empirical(proj)?, n_points)
        })?
    };
    let mut sorted = estimates.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) };
    let scale = l_k * (n_points as f64).ln().sqrt();
    let upper_threshold = UPPER_MULTIPLE * median;
    let lower_threshold = LOWER_MULTIPLE * median;
    let m = n_dirs as f64;
    let count = |pred: &dyn Fn(f64) -> bool| estimates.iter().filter(|&&v| pred(v)).count();
    let below = count(&|v| v < lower_threshold);
    let above = count(&|v| v > upper_threshold);
    let between = n_dirs - below - above;
    let nf = n_points as f64;
    Ok(DirectionScan {
        n_points,
        r,
        median,
        c1: upper_threshold / scale,
        c2: lower_threshold / scale,
        upper_threshold,
        lower_threshold,
        fraction_upper: (n_dirs - above) as f64 / m,
        fraction_lower: (n_dirs - below) as f64 / m,
        fraction_below: below as f64 / m,
        fraction_between: between as f64 / m,
        fraction_above: above as f64 / m,
        predicted_upper_measure: 1.0 - nf.powf(-r),
        predicted_lower_order: nf.ln().sqrt() * nf.powf(-r),
        distinct_estimates: estimates.iter().map(|v| v.to_bits()).collect::<BTreeSet<_>>().len(),
        estimates,
    })
}

/// The abscissa used by [`scaling_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitTransform {
    /// `log value` against `log log N`; the slope is the exponent of `log N`.
    LogLogN,
    /// `value²` against `log N`; linear when `value ∼ √log N`.
    LogN,
}

impl FitTransform {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::LogLogN => "log-log-N",
            Self::LogN => "log-N",
        }
    }

    /// `(x, y)` for one row.
    pub fn apply(&self, n: u64, value: f64) -> (f64, f64) {
        let ln = (n as f64).ln();
        match self {
            Self::LogLogN => (ln.ln(), value.ln()),
            Self::LogN => (ln, value * value),
        }
    }
}

/// Least-squares line through the transformed rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn scaling_fit(rows: &[(u64, f64)], transform: FitTransform) -> Result<ScalingFit> {
    if rows.len() < 4 {
        return Err(Error::domain(format!("a scaling fit needs at least 4 rows, got {}", rows.len())));
    }
    let distinct: BTreeSet<u64> = rows.iter().map(|r| r.0).collect();
    if distinct.len() != rows.len() {
        return Err(Error::domain("N values in a scaling fit must be distinct"));
    }
    if rows.iter().any(|&(n, v)| n < 2 || !(v > 0.0) || !v.is_finite()) {
        return Err(Error::domain("scaling fits need N >= 2 and finite positive values"));
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(n, v)| transform.apply(n, v)).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 1e-12 * (mx * mx).max(1.0)) {
        return Err(Error::domain("the transformed N values have no spread"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    Ok(ScalingFit { exponent: slope, intercept, r2 })
}
