use super::{check_convexity, OrliczFunction, OrliczKind};
use crate::mathkit::neumaier_sum;
use crate::{Error, Result};

/// Searches never leave `[x/u*, x·u*]` around their natural scale `x`.
pub const INVERSION_BRACKET: f64 = 1e6;

const BISECTION_REL_TOL: f64 = 1e-12;
const GOLDEN_ITERATIONS: usize = 90;

/// Smallest `s` in `[lo, hi]` with `pred(s)`, for `pred` monotone
/// (false below the answer, true above). Returns the upper end of the final
/// bracket.
fn bisect_threshold(mut lo: f64, mut hi: f64, mut pred: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    while hi / lo - 1.0 > BISECTION_REL_TOL {
        let mid = if hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `inf{s > 0 : M(1/s) ≤ 1/N}`, the Orlicz estimate of `E max_{i≤N} |X_i|`.
///
/// `s ↦ M(1/s)` is nonincreasing; the bracket starts at `1/zero_threshold`
/// (where `M(1/s)` vanishes) or is found by doubling from 1, then bisected to
/// relative precision 1e-12.
pub fn invert_for_support(m: &OrliczFunction, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    let level = 1.0 / n as f64;
    let below = |s: f64| -> Result<bool> { Ok(m.eval(1.0 / s)? <= level) };
    let mut hi = if m.zero_threshold() > 0.0 { 1.0 / m.zero_threshold() } else { 1.0 };
    let start = hi;
    while !below(hi)? {
        hi *= 2.0;
        if hi > start * INVERSION_BRACKET {
            return Err(Error::Range(format!("M(1/s) exceeds 1/{n} for every s up to {hi:e}")));
        }
    }
    let top = hi;
    let mut lo = hi;
    loop {
        lo *= 0.5;
        if lo < top / INVERSION_BRACKET {
            return Err(Error::Range(format!(
                "M(1/s) stays below 1/{n} for every s down to {lo:e}; the infimum is not resolved"
            )));
        }
        if !below(lo)? {
            break;
        }
        hi = lo;
    }
    bisect_threshold(lo, hi, below)
}

/// `‖x‖_M = inf{ρ > 0 : Σ M(|x_i|/ρ) ≤ 1}`.
///
/// A vector with all `|x_i|` equal to `c` gives `c · invert_for_support(M, len)`,
/// which is the same defining inequality.
pub fn luxemburg_norm(x: &[f64], m: &OrliczFunction) -> Result<f64> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("vector entries must be finite"));
    }
    let max = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max == 0.0 {
        return Ok(0.0);
    }
    if x.iter().all(|v| v.abs() == max) {
        return Ok(max * invert_for_support(m, x.len() as u64)?);
    }
    let fits = |rho: f64| -> Result<bool> {
        let terms: Vec<f64> = x.iter().map(|v| m.eval(v.abs() / rho)).collect::<Result<_>>()?;
        Ok(neumaier_sum(terms) <= 1.0)
    };
    let lo = max / INVERSION_BRACKET;
    let hi = x.len() as f64 * max * INVERSION_BRACKET;
    if !fits(hi)? {
        return Err(Error::Range(format!("Σ M(|x_i|/ρ) exceeds 1 for ρ up to {hi:e}")));
    }
    if fits(lo)? {
        return Err(Error::Range(format!("Σ M(|x_i|/ρ) is at most 1 already at ρ = {lo:e}")));
    }
    bisect_threshold(lo, hi, fits)
}

/// `M*(x) = sup_{0 ≤ t ≤ grid_max} (x t − M(t))`, each value by golden-section
/// search on the concave inner objective.
///
/// Fails when `M` is not convex on `[0, grid_max]`.
pub fn legendre_dual(m: &OrliczFunction, grid_max: f64) -> Result<OrliczFunction> {
    if !(grid_max > 0.0) || !grid_max.is_finite() {
        return Err(Error::domain(format!("grid_max must be finite and positive, got {grid_max}")));
    }
    if let Some(why) = check_convexity(m, grid_max, 65)? {
        return Err(Error::domain(format!("Legendre dual needs a convex function: {why}")));
    }
    // M*(x) = 0 exactly for x up to the right derivative of M at 0.
    let h = grid_max * 1e-9;
    let slope0 = m.eval(h)? / h;
    let inner = m.clone();
    OrliczFunction::new(OrliczKind::Dual, slope0, move |x| {
        let phi = |t: f64| -> Result<f64> { Ok(x * t - inner.eval(t)?) };
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (0.0, grid_max);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (phi(c)?, phi(d)?);
        for _ in 0..GOLDEN_ITERATIONS {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = phi(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = phi(d)?;
            }
        }
        Ok(fc.max(fd).max(phi(grid_max)?).max(0.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::MarginalDensity;
    use crate::mathkit::QuadratureSpec;
    use crate::orlicz::PBallSpec;
    use proptest::prelude::*;

    fn cube() -> OrliczFunction {
        OrliczFunction::tail_integral(MarginalDensity::uniform(0.5).unwrap(), QuadratureSpec::relative(1e-12)).unwrap()
    }

    fn cube_exact(n: f64) -> f64 {
        (1.0 + 1.0 / n - (2.0 / n + 1.0 / (n * n)).sqrt()) / 2.0
    }

    #[test]
    fn cube_inversion_matches_closed_form() {
        let m = cube();
        for n in [2u64, 10, 1000, 1_000_000] {
            let got = invert_for_support(&m, n).unwrap();
            let want = cube_exact(n as f64);
            assert!((got / want - 1.0).abs() < 1e-10, "N={n}: {got} vs {want}");
        }
        assert!((invert_for_support(&m, 2).unwrap() - 0.190_983).abs() < 1e-6);
        assert!((invert_for_support(&m, 10).unwrap() - 0.320_871_215_252_208).abs() < 1e-12);
    }

    #[test]
    fn power_inversion() {
        let m = OrliczFunction::power(2.0).unwrap();
        assert!((invert_for_support(&m, 4).unwrap() - 2.0).abs() < 1e-11);
        assert!(invert_for_support(&m, 0).is_err());
    }

    #[test]
    fn inversion_range_errors() {
        let huge = OrliczFunction::scaled_power(1.0, 1e12).unwrap();
        assert!(matches!(invert_for_support(&huge, 10), Err(Error::Range(_))));
        let tiny = OrliczFunction::scaled_power(1.0, 1e-20).unwrap();
        assert!(matches!(invert_for_support(&tiny, 10), Err(Error::Range(_))));
    }

    #[test]
    fn inversion_is_monotone_in_n() {
        let fns = [cube(), OrliczFunction::power(3.0).unwrap(), OrliczFunction::pball_first(PBallSpec::new(1.5, 10).unwrap()).unwrap()];
        for m in &fns {
            let vals: Vec<f64> = [2u64, 10, 100, 1000, 10_000].iter().map(|&n| invert_for_support(m, n).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{:?}: {vals:?}", m.kind());
        }
    }

    #[test]
    fn luxemburg_examples() {
        let sq = OrliczFunction::power(2.0).unwrap();
        assert!((luxemburg_norm(&[3.0, 4.0], &sq).unwrap() - 5.0).abs() < 1e-10);
        let lin = OrliczFunction::power(1.0).unwrap();
        assert!((luxemburg_norm(&[1.0, 1.0, 1.0], &lin).unwrap() - 3.0).abs() < 1e-10);
        assert!((luxemburg_norm(&[1.0, -2.0, 0.5], &lin).unwrap() - 3.5).abs() < 1e-10);
        assert_eq!(luxemburg_norm(&[0.0, 0.0], &sq).unwrap(), 0.0);
    }

    #[test]
    fn luxemburg_of_ones_is_the_inversion() {
        let m = cube();
        for n in [2usize, 17, 500] {
            let ones = vec![1.0; n];
            assert_eq!(luxemburg_norm(&ones, &m).unwrap(), invert_for_support(&m, n as u64).unwrap());
        }
    }

    #[test]
    fn dual_of_quadratic_and_cubic() {
        let half_sq = OrliczFunction::scaled_power(2.0, 0.5).unwrap();
        let dual = legendre_dual(&half_sq, 10.0).unwrap();
        assert_eq!(dual.eval(0.0).unwrap(), 0.0);
        for x in [0.1, 1.0, 2.5, 7.0] {
            assert!((dual.eval(x).unwrap() - 0.5 * x * x).abs() < 1e-8, "x={x}");
        }
        let cubic = OrliczFunction::scaled_power(3.0, 1.0 / 3.0).unwrap();
        let dual = legendre_dual(&cubic, 10.0).unwrap();
        for x in [0.5, 2.0, 9.0] {
            assert!((dual.eval(x).unwrap() - 2.0 / 3.0 * x.powf(1.5)).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn dual_rejects_nonconvex() {
        let concave = OrliczFunction::new(OrliczKind::Custom, 0.0, |t| Ok(t.sqrt())).unwrap();
        assert!(matches!(legendre_dual(&concave, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn dual_involution() {
        let m = OrliczFunction::scaled_power(2.5, 0.4).unwrap();
        let back = legendre_dual(&legendre_dual(&m, 4.0).unwrap(), 20.0).unwrap();
        for i in 0..=20 {
            let t = 4.0 * i as f64 / 20.0;
            assert!((back.eval(t).unwrap() - m.eval(t).unwrap()).abs() < 1e-6, "t={t}");
        }
        let ball = OrliczFunction::pball_first(PBallSpec::new(2.0, 5).unwrap()).unwrap();
        let t_max = 3.0 / ball.zero_threshold();
        let slope_max = 2.0 * (ball.eval(t_max).unwrap() - ball.eval(0.999 * t_max).unwrap()) / (0.001 * t_max);
        let back = legendre_dual(&legendre_dual(&ball, t_max).unwrap(), slope_max).unwrap();
        for i in 0..=8 {
            let t = t_max * i as f64 / 8.0;
            assert!((back.eval(t).unwrap() - ball.eval(t).unwrap()).abs() < 1e-6, "t={t}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn luxemburg_is_homogeneous(
            x in proptest::collection::vec(-5.0f64..5.0, 2..8),
            c in prop_oneof![-30.0f64..-0.01, 0.01f64..30.0],
            q in 1.0f64..4.0,
        ) {
            prop_assume!(x.iter().any(|v| v.abs() > 1e-6));
            let m = OrliczFunction::power(q).unwrap();
            let base = luxemburg_norm(&x, &m).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
            let got = luxemburg_norm(&scaled, &m).unwrap();
            prop_assert!((got - c.abs() * base).abs() <= 1e-9 * c.abs() * base);
        }
    }
}
