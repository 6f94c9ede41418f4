use crate::bodies::MarginalDensity;
use crate::{Error, Result};

/// Relative finite-difference step for the hypothesis checks.
const FD_STEP: f64 = 1e-5;
const CHECK_POINTS: usize = 200;

/// `h^{-1}(h(0)(1 − α log N / n))` with `h(t) = f(t)^{1/(n−1)}` the
/// `(n−1)`-th root of the section volume, `f` the marginal density of a
/// volume-one body in `R^n`.
///
/// The bound needs `h' < 0` on `(0, R)`, `−h'(t)/t` nondecreasing, and
/// `h(R) = 0`; these are checked by central differences on a grid and a
/// failure is reported as a precondition error naming the hypothesis.
pub fn general_upper_bound(marginal: &MarginalDensity, n_points: u64, alpha: f64) -> Result<f64> {
    let n = marginal.dim();
    if n < 2 {
        return Err(Error::domain("the bound needs a marginal of a body in dimension n >= 2"));
    }
    if n_points == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("alpha must be finite and positive, got {alpha}")));
    }
    let shrink = alpha * (n_points as f64).ln() / n as f64;
    if shrink >= 1.0 {
        return Err(Error::domain(format!("alpha·log N / n = {shrink} must be below 1")));
    }
    let r = marginal.support_radius();
    let root = 1.0 / (n as f64 - 1.0);
    let h = |t: f64| marginal.density(t).max(0.0).powf(root);
    check_hypotheses(&h, r)?;

    let level = h(0.0) * (1.0 - shrink);
    if level >= h(0.0) {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, r);
    while hi - lo > 1e-13 * r {
        let mid = 0.5 * (lo + hi);
        if h(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_hypotheses(h: &impl Fn(f64) -> f64, r: f64) -> Result<()> {
    let delta = FD_STEP * r;
    let h0 = h(0.0);
    if !(h0 > 0.0) {
        return Err(Error::Precondition("h(0) must be positive".into()));
    }
    let grid: Vec<f64> = (1..CHECK_POINTS).map(|i| r * i as f64 / CHECK_POINTS as f64).collect();
    let slopes: Vec<f64> = grid.iter().map(|&t| (h(t + delta) - h(t - delta)) / (2.0 * delta)).collect();
    // Differences below this are roundoff in h.
    let noise = 1e3 * f64::EPSILON * h0 / delta;
    if let Some((t, d)) = grid.iter().zip(&slopes).find(|(_, &d)| d >= -noise) {
        return Err(Error::Precondition(format!("h' < 0 fails at t = {t:e} (h' ≈ {d:e})")));
    }
    let ratios: Vec<f64> = grid.iter().zip(&slopes).map(|(t, d)| -d / t).collect();
    for (w, t) in ratios.windows(2).zip(&grid[1..]) {
        if w[1] < w[0] * (1.0 - 1e-6) - noise / t {
            return Err(Error::Precondition(format!("-h'(t)/t is not nondecreasing near t = {t:e}")));
        }
    }
    if h(r) > 1e-9 * h0 {
        return Err(Error::Precondition(format!("h does not vanish at the support edge (h(R) = {:e})", h(r))));
    }
    Ok(())
}
