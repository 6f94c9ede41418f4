//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The panel with the largest error estimate is bisected until the summed
//! error meets the tolerance. Nodes never touch panel endpoints, so
//! integrable endpoint singularities are handled by repeated shrinkage of
//! the panels next to them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{neumaier_sum, Interval, QuadratureSpec};
use crate::{Error, Result};

// QUADPACK digits, kept verbatim.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Hard cap on live panels; reaching it is reported like depth exhaustion.
const MAX_PANELS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, depth: u32) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(Error::domain(format!("integrand is not finite at {center}")));
    }
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::domain(format!("integrand is not finite near {center} ± {dx}")));
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error, depth })
}

/// Integrates `f` over `iv`; see [`quad_adaptive_detailed`].
pub fn quad_adaptive<F: FnMut(f64) -> f64>(f: F, iv: Interval, spec: &QuadratureSpec) -> Result<f64> {
    quad_adaptive_detailed(f, iv, spec).map(|r| r.value)
}

/// Integrates `f` over `iv`, returning the value with its error estimate.
///
/// Fails with [`Error::Accuracy`] when every panel that still needs work has
/// reached `spec.max_depth`, carrying the best estimate and its error bound.
pub fn quad_adaptive_detailed<F: FnMut(f64) -> f64>(
    mut f: F,
    iv: Interval,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    let (a, b) = (iv.lo(), iv.hi());
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let mut evaluations = 15;
    let first = gk15(&mut f, a, b, 0)?;
    let mut heap = BinaryHeap::new();
    let mut finished: Vec<Panel> = Vec::new();
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);

    loop {
        let target = spec.abs_tol.max(spec.rel_tol * value.abs());
        if error <= target {
            // Re-sum exactly before accepting, the running sums drift.
            let exact = neumaier_sum(heap.iter().chain(finished.iter()).map(|p| p.value));
            let exact_err: f64 = heap.iter().chain(finished.iter()).map(|p| p.error).sum();
            if exact_err <= spec.abs_tol.max(spec.rel_tol * exact.abs()) {
                return Ok(QuadResult { value: exact, error: exact_err, evaluations });
            }
            value = exact;
            error = exact_err;
        }
        let Some(worst) = heap.pop() else {
            let exact = neumaier_sum(finished.iter().map(|p| p.value));
            return Err(Error::Accuracy { estimate: exact, error_bound: error });
        };
        let mid = 0.5 * (worst.a + worst.b);
        let splittable = worst.depth < spec.max_depth
            && mid > worst.a
            && mid < worst.b
            && heap.len() + finished.len() < MAX_PANELS;
        if !splittable {
            finished.push(worst);
            continue;
        }
        let left = gk15(&mut f, worst.a, mid, worst.depth + 1)?;
        let right = gk15(&mut f, mid, worst.b, worst.depth + 1)?;
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

/// Integrates over `[points[0], points[last]]`, splitting at every interior
/// breakpoint (kinks or jumps of the integrand). The tolerance is shared out
/// in proportion to sub-interval length.
pub fn quad_with_breaks<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    if points.len() < 2 {
        return Ok(0.0);
    }
    let total = points[points.len() - 1] - points[0];
    if total <= 0.0 {
        return Ok(0.0);
    }
    let mut parts = Vec::with_capacity(points.len() - 1);
    for w in points.windows(2) {
        let iv = Interval::new(w[0], w[1])?;
        let share = (iv.width() / total).max(1e-6);
        let sub = QuadratureSpec { abs_tol: spec.abs_tol * share, ..*spec };
        parts.push(quad_adaptive(&mut f, iv, &sub)?);
    }
    Ok(neumaier_sum(parts))
}
