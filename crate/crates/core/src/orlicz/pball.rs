//! Closed forms for the coordinate Orlicz function of `D_p^n` and for the
//! spherical Orlicz function `M_{⟨θ, e_1⟩}`.
//!
//! Both closed forms for `D_p^n` are integrals over `θ ∈ [0, arccos σ^{1/2}]`
//! with `σ = (s|B_p^n|^{1/n})^p`. They are evaluated after the substitution
//! `x = cos²θ` followed by `x = σe^u`, which turns every integrand into a
//! smooth function on `[0, −ln σ]` with powers of `1 − x` carried in log space
//! and the power of `σ` shared by all terms factored out.

use crate::mathkit::{ball_volume_ratio, log_ball_volume, neumaier_sum, quad_adaptive, Interval, QuadratureSpec};
use crate::{Error, Result};

/// `ln(1 − e^y)` for `y < 0`.
fn ln_one_minus_exp(y: f64) -> f64 {
    (-y.exp_m1()).ln()
}

/// Parameters of `D_p^n` shared by both closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PBallSpec {
    p: f64,
    n: usize,
    /// `|B_p^{n−1}| / |B_p^n|`.
    ratio: f64,
    /// `ln |B_p^n|^{1/n}`.
    ln_a: f64,
    quad: QuadratureSpec,
}

impl PBallSpec {
    pub fn new(p: f64, n: usize) -> Result<Self> {
        Self::with_quad(p, n, QuadratureSpec::relative(1e-11))
    }

    pub fn with_quad(p: f64, n: usize, quad: QuadratureSpec) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("closed forms need finite p >= 1, got {p}")));
        }
        if n < 2 {
            return Err(Error::domain(format!("closed forms need n >= 2, got {n}")));
        }
        Ok(Self { p, n, ratio: ball_volume_ratio(p, n)?, ln_a: log_ball_volume(p, n)? / n as f64, quad })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coordinate half-width of `D_p^n`, `|B_p^n|^{-1/n}`.
    pub fn support_radius(&self) -> f64 {
        (-self.ln_a).exp()
    }

    /// `ln σ`, or `None` when `M(1/s) = 0`.
    fn ln_sigma(&self, s: f64) -> Result<Option<f64>> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::domain(format!("s must be finite and positive, got {s}")));
        }
        let ln_sa = s.ln() + self.ln_a;
        if ln_sa >= 0.0 {
            return Ok(None);
        }
        Ok(Some(self.p * ln_sa))
    }

    /// `σ^{m−1} · (1/2)∫_σ^1 (1 − x)^k x^{−m} dx`, over `u = ln(x/σ)`.
    ///
    /// The power of `σ` is left out so that the large factor common to all
    /// terms of a closed form is applied once, after the integrands have been
    /// evaluated where their exponents are small.
    fn power_integral_reduced(&self, ln_sigma: f64, k: f64, m: f64, quad: &QuadratureSpec) -> Result<f64> {
        let iv = Interval::new(0.0, -ln_sigma)?;
        Ok(0.5 * quad_adaptive(|u| (k * ln_one_minus_exp(ln_sigma + u) + u * (1.0 - m)).exp(), iv, quad)?)
    }

    /// `σ^{1/p−c−1} · (1/2)∫_σ^1 x^{−1−1/p} K(x) dx` with
    /// `K(x) = (1/p)∫_x^1 u^{c} (1 − u)^k du`, both over shifted log variables.
    fn nested_integral_reduced(&self, ln_sigma: f64, c: f64, k: f64, quad: &QuadratureSpec) -> Result<f64> {
        let p = self.p;
        let top = -ln_sigma;
        let inner_quad = quad.tightened(10.0);
        let mut failure = None;
        let outer = quad_adaptive(
            |v| {
                let inner = Interval::new(v, top).and_then(|iv| {
                    quad_adaptive(|w| (w * (c + 1.0) + k * ln_one_minus_exp(ln_sigma + w)).exp(), iv, &inner_quad)
                });
                match inner {
                    Ok(val) => (-v / p).exp() * val / p,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            Interval::new(0.0, top)?,
            quad,
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(0.5 * outer),
        }
    }

    /// The two terms `[A, B]` of the first closed form for `M(1/s)`:
    ///
    /// ```text
    /// A = 4/(p(n−1+p)) · r · ∫_0^φ sin^{2(n−1)/p+3}θ / cos^{3−2/p}θ dθ
    /// B = 4(2−p)/(p(n−1+p)) · r · ∫_0^φ sinθ / cos^{1+2/p}θ · (1/p)∫_{cos²θ}^1 x^{2/p−2}(1−x)^{(n−1)/p+1} dx dθ
    /// ```
    ///
    /// with `r = |B_p^{n−1}|/|B_p^n|` and `φ = arccos((s|B_p^n|^{1/n})^{p/2})`.
    pub fn first_terms(&self, s: f64) -> Result<[f64; 2]> {
        let (scale, r) = self.first_reduced(s)?;
        Ok(r.map(|v| scale * v))
    }

    /// `(scale, [a, b])` with `[A, B] = scale · [a, b]`.
    fn first_reduced(&self, s: f64) -> Result<(f64, [f64; 2])> {
        let Some(ln_sigma) = self.ln_sigma(s)? else {
            return Ok((0.0, [0.0, 0.0]));
        };
        let (p, nm1) = (self.p, self.n as f64 - 1.0);
        let k1 = nm1 / p + 1.0;
        let scale = self.ratio / (p * (nm1 + p)) * ((1.0 / p - 1.0) * ln_sigma).exp();
        let a = 4.0 * self.power_integral_reduced(ln_sigma, k1, 2.0 - 1.0 / p, &self.quad)?;
        let b = if p == 2.0 {
            0.0
        } else {
            4.0 * (2.0 - p) * self.nested_integral_reduced(ln_sigma, 2.0 / p - 2.0, k1, &self.quad)?
        };
        Ok((scale, [a, b]))
    }

    /// The three terms `[T1, T2, T3]` of the second closed form for `M(1/s)`:
    ///
    /// ```text
    /// T1 = 2/((n−1+p)(n−1+2p)) · r · (1 − σ)^{(n−1)/p+2} / σ^{2−1/p}
    /// T2 = −12(p−1)/(p(n−1+p)(n−1+2p)) · r · ∫_0^φ sin^{2(n−1)/p+5}θ / cos^{5−2/p}θ dθ
    /// T3 = −8(2−p)(p−1)/(p(n−1+2p)(n−1+p)) · r · ∫_0^φ sinθ / cos^{1+2/p}θ · (1/p)∫_{cos²θ}^1 x^{2/p−3}(1−x)^{(n−1)/p+2} dx dθ
    /// ```
    pub fn second_terms(&self, s: f64) -> Result<[f64; 3]> {
        let (scale, r) = self.second_reduced(s)?;
        Ok(r.map(|v| scale * v))
    }

    /// `(scale, [t1, t2, t3])` with `[T1, T2, T3] = scale · [t1, t2, t3]` and
    /// `scale ∝ σ^{1/p−2}`.
    fn second_reduced(&self, s: f64) -> Result<(f64, [f64; 3])> {
        let Some(ln_sigma) = self.ln_sigma(s)? else {
            return Ok((0.0, [0.0, 0.0, 0.0]));
        };
        let (p, nm1) = (self.p, self.n as f64 - 1.0);
        let k2 = nm1 / p + 2.0;
        let scale = self.ratio / (p * (nm1 + p) * (nm1 + 2.0 * p)) * ((1.0 / p - 2.0) * ln_sigma).exp();
        let t1 = 2.0 * p * (k2 * (-ln_sigma.exp()).ln_1p()).exp();
        if p == 1.0 {
            return Ok((scale, [t1, 0.0, 0.0]));
        }
        // The reduced terms cancel down to O(σ^{2−1/p}) of their size, so the
        // integrals are taken 100× tighter than M needs.
        let quad = self.quad.tightened(100.0);
        let t2 = -12.0 * (p - 1.0) * self.power_integral_reduced(ln_sigma, k2, 3.0 - 1.0 / p, &quad)?;
        let t3 = if p == 2.0 {
            0.0
        } else {
            -8.0 * (2.0 - p) * (p - 1.0) * self.nested_integral_reduced(ln_sigma, 2.0 / p - 3.0, k2, &quad)?
        };
        Ok((scale, [t1, t2, t3]))
    }

    /// `M(1/s)` from the first closed form.
    pub fn first(&self, s: f64) -> Result<f64> {
        let (scale, r) = self.first_reduced(s)?;
        Ok(scale * neumaier_sum(r))
    }

    /// `M(1/s)` from the second closed form.
    pub fn second(&self, s: f64) -> Result<f64> {
        let (scale, r) = self.second_reduced(s)?;
        Ok(scale * neumaier_sum(r))
    }
}

/// `M(1/s)` for the coordinate marginal of `D_p^n`, first closed form.
/// Zero for `s ≥ |B_p^n|^{−1/n}`.
pub fn m_pball_first(p: f64, n: usize, s: f64) -> Result<f64> {
    PBallSpec::new(p, n)?.first(s)
}

/// `M(1/s)` for the coordinate marginal of `D_p^n`, second closed form.
pub fn m_pball_second(p: f64, n: usize, s: f64) -> Result<f64> {
    PBallSpec::new(p, n)?.second(s)
}

/// Terms `[A, B]` of [`m_pball_first`].
pub fn m_pball_first_terms(p: f64, n: usize, s: f64) -> Result<[f64; 2]> {
    PBallSpec::new(p, n)?.first_terms(s)
}

/// Terms `[T1, T2, T3]` of [`m_pball_second`].
pub fn m_pball_second_terms(p: f64, n: usize, s: f64) -> Result<[f64; 3]> {
    PBallSpec::new(p, n)?.second_terms(s)
}

/// `2 w_{n−1} / (n w_n)` with `w_k = |B_2^k|`.
fn spherical_constant(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("spherical Orlicz function needs n >= 2, got {n}")));
    }
    Ok(2.0 * ball_volume_ratio(2.0, n)? / n as f64)
}

fn check_spherical_argument(s: f64) -> Result<()> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("argument must be finite and nonnegative, got {s}")));
    }
    Ok(())
}

/// `M_{⟨θ,e_1⟩}(s) = (2w_{n−1}/(n w_n)) ∫_0^{arccos(1/s)} sin^n y / cos² y dy`,
/// zero for `s ≤ 1`.
pub fn m_spherical(n: usize, s: f64) -> Result<f64> {
    let c = spherical_constant(n)?;
    check_spherical_argument(s)?;
    if s <= 1.0 {
        return Ok(0.0);
    }
    let upper = (1.0 / s).acos();
    let nf = n as f64;
    let spec = QuadratureSpec::relative(1e-11);
    let v = quad_adaptive(|y| y.sin().powf(nf) / (y.cos() * y.cos()), Interval::new(0.0, upper)?, &spec)?;
    Ok(c * v)
}

/// `ln(1 − 1/t²)` at `t = 1 + x`, from `x` so that arguments near 1 keep
/// their relative precision.
fn ln_one_minus_inv_sq(x: f64) -> f64 {
    if x < 1.0 {
        (x * (2.0 + x)).ln() - 2.0 * x.ln_1p()
    } else {
        let t = 1.0 + x;
        (-(t * t).recip()).ln_1p()
    }
}

/// The same function from `∫_1^s (1 − 1/t²)^{(n−1)/2} dt`.
pub fn m_spherical_defining(n: usize, s: f64) -> Result<f64> {
    let c = spherical_constant(n)?;
    check_spherical_argument(s)?;
    if s <= 1.0 {
        return Ok(0.0);
    }
    let e = (n as f64 - 1.0) / 2.0;
    let spec = QuadratureSpec::relative(1e-12);
    Ok(c * quad_adaptive(|x| (e * ln_one_minus_inv_sq(x)).exp(), Interval::new(0.0, s - 1.0)?, &spec)?)
}

/// [`m_spherical_defining`] at every point of an ascending slice, by
/// accumulating the integral between consecutive arguments.
pub(crate) fn m_spherical_sorted(n: usize, ascending: &[f64]) -> Result<Vec<f64>> {
    let c = spherical_constant(n)?;
    let e = (n as f64 - 1.0) / 2.0;
    let g = |x: f64| (e * ln_one_minus_inv_sq(x)).exp();
    let spec = QuadratureSpec::relative(1e-12);
    let mut out = Vec::with_capacity(ascending.len());
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut prev = 1.0f64;
    for &u in ascending {
        check_spherical_argument(u)?;
        if u <= 1.0 {
            out.push(0.0);
            continue;
        }
        if u < prev {
            return Err(Error::domain("arguments must be sorted ascending"));
        }
        if u > prev {
            let v = quad_adaptive(g, Interval::new(prev - 1.0, u - 1.0)?, &spec)?;
            let t = sum + v;
            comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
            sum = t;
            prev = u;
        }
        out.push(c * (sum + comp));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{coordinate_marginal, BodySpec};
    use crate::orlicz::{m_from_tail, MTailSpec};
    use std::f64::consts::PI;

    fn tail_value(p: f64, n: usize, s: f64) -> f64 {
        let body = BodySpec::normalized(p, n).unwrap();
        let spec = MTailSpec::new(coordinate_marginal(&body), QuadratureSpec::relative(1e-11));
        m_from_tail(&spec, 1.0 / s).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs())
    }

    #[test]
    fn vanishes_at_support() {
        for &p in &[1.0, 2.0, 3.0] {
            let spec = PBallSpec::new(p, 6).unwrap();
            let r = spec.support_radius();
            assert_eq!(spec.first(r).unwrap(), 0.0);
            assert_eq!(spec.second(r).unwrap(), 0.0);
            assert_eq!(spec.first(2.0 * r).unwrap(), 0.0);
        }
    }

    #[test]
    fn disk_first_form_is_single_term() {
        let spec = PBallSpec::new(2.0, 2).unwrap();
        let r = spec.support_radius();
        assert!((r - PI.powf(-0.5)).abs() < 1e-15);
        for frac in [0.2, 0.4, 0.55] {
            let s = frac * r;
            let [a, b] = spec.first_terms(s).unwrap();
            assert_eq!(b, 0.0);
            let oracle = tail_value(2.0, 2, s);
            assert!(rel(a, oracle) < 1e-7, "s={s}: {a} vs {oracle}");
        }
    }

    #[test]
    fn first_form_matches_tail_integral() {
        let spec = PBallSpec::new(3.0, 6).unwrap();
        let s = 0.5 * spec.support_radius();
        let v = spec.first(s).unwrap();
        let oracle = tail_value(3.0, 6, s);
        assert!(rel(v, oracle) < 1e-7, "{v} vs {oracle}");
    }

    #[test]
    fn forms_agree_on_grid() {
        for &p in &[1.0, 1.5, 2.0, 3.0, 6.0] {
            for n in [2usize, 10, 50] {
                let spec = PBallSpec::new(p, n).unwrap();
                for frac in [0.1, 0.5, 0.9] {
                    let s = frac * spec.support_radius();
                    let a = spec.first(s).unwrap();
                    let terms = spec.second_terms(s).unwrap();
                    let b = neumaier_sum(terms);
                    // The second form cancels: its terms can exceed the sum by
                    // orders of magnitude, and each carries ~1e-13 relative error.
                    let kappa = terms.iter().map(|t| t.abs()).sum::<f64>() / b.abs();
                    assert!(rel(a, b) < 1e-7 + 1e-13 * kappa, "p={p} n={n} frac={frac}: {a} vs {b} (kappa {kappa:e})");
                }
            }
        }
    }

    #[test]
    fn cross_polytope_explicit_formula() {
        for n in [2usize, 5, 30] {
            let spec = PBallSpec::new(1.0, n).unwrap();
            let a = (-spec.support_radius().ln()).exp();
            let ratio = ball_volume_ratio(1.0, n).unwrap();
            let nf = n as f64;
            for frac in [0.1, 0.5, 0.8] {
                let s = frac / a;
                let terms = spec.second_terms(s).unwrap();
                assert_eq!(&terms[1..], &[0.0, 0.0]);
                let explicit = 2.0 / (nf * (nf + 1.0)) * ratio * (1.0 - s * a).powf(nf + 1.0) / (s * a);
                assert!(rel(terms[0], explicit) < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PBallSpec::new(0.5, 3).is_err());
        assert!(PBallSpec::new(f64::INFINITY, 3).is_err());
        assert!(PBallSpec::new(2.0, 1).is_err());
        assert!(m_pball_first(2.0, 3, 0.0).is_err());
    }

    #[test]
    fn spherical_values() {
        assert_eq!(m_spherical(5, 1.0).unwrap(), 0.0);
        assert_eq!(m_spherical(5, 0.3).unwrap(), 0.0);
        let exact = 2.0 / PI * (3f64.sqrt() - PI / 3.0);
        assert!((m_spherical(2, 2.0).unwrap() - exact).abs() < 1e-12);
        for n in [2usize, 5, 10, 30] {
            for s in [1.01, 1.5, 3.0, 20.0] {
                let a = m_spherical(n, s).unwrap();
                let b = m_spherical_defining(n, s).unwrap();
                assert!(rel(a, b) < 1e-9, "n={n} s={s}: {a} vs {b}");
            }
        }
        assert!(m_spherical(1, 2.0).is_err());
    }

    #[test]
    fn spherical_sorted_matches_pointwise() {
        let args = [0.5, 1.0, 1.0001, 1.2, 1.2, 2.5, 7.0];
        let got = m_spherical_sorted(5, &args).unwrap();
        for (u, v) in args.iter().zip(&got) {
            let want = m_spherical_defining(5, *u).unwrap();
            assert!((v - want).abs() <= 1e-11 * want.max(1e-300), "u={u}");
        }
        assert!(m_spherical_sorted(5, &[2.0, 1.5]).is_err());
    }

    #[test]
    fn spherical_sorted_dense_near_one() {
        let args: Vec<f64> = (1..=2000).map(|k| 1.0 + k as f64 * 1e-9).chain([1.001, 1.5]).collect();
        let got = m_spherical_sorted(10, &args).unwrap();
        assert!(got.windows(2).all(|w| w[0] <= w[1]));
        let want = m_spherical_defining(10, 1.5).unwrap();
        assert!((got.last().unwrap() - want).abs() <= 1e-11 * want);
    }

    #[test]
    fn spherical_matches_sphere_monte_carlo() {
        use crate::bodies::sample_sphere;
        let (n, s) = (5usize, 3.0);
        let count = 1_000_000;
        let dirs = sample_sphere(n, count, 12).unwrap();
        let samples: Vec<f64> = dirs.iter().map(|d| (s * d.coords()[0].abs() - 1.0).max(0.0)).collect();
        let mean = samples.iter().sum::<f64>() / count as f64;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count as f64 - 1.0);
        let se = (var / count as f64).sqrt();
        let exact = m_spherical(n, s).unwrap();
        assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} (se {se})");
    }
}
