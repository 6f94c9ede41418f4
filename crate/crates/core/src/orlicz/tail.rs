//! Orlicz functions of a one-dimensional law given by its density.

use crate::bodies::{MarginalDensity, MarginalShape};
use crate::mathkit::{neumaier_sum, quad_adaptive, quad_with_breaks, Interval, QuadratureSpec};
use crate::{Error, Result};

/// The law of `|⟨X, θ⟩|` (through its even density) and the quadrature
/// tolerances used to integrate against it.
#[derive(Debug, Clone)]
pub struct MTailSpec {
    pub marginal: MarginalDensity,
    pub quad: QuadratureSpec,
}

impl MTailSpec {
    pub fn new(marginal: MarginalDensity, quad: QuadratureSpec) -> Self {
        Self { marginal, quad }
    }

    /// Marginal breakpoints restricted to `[lo, R]`, endpoints included.
    fn breaks_from(&self, lo: f64) -> Vec<f64> {
        let r = self.marginal.support_radius();
        let mut pts = vec![lo];
        pts.extend(self.marginal.breakpoints().into_iter().filter(|&b| b > lo && b < r));
        pts.push(r);
        pts
    }

    /// `E[|X| 1{|X| ≥ v}] = 2∫_v^R r f(r) dr`.
    fn truncated_moment(&self, v: f64, quad: &QuadratureSpec) -> Result<f64> {
        if v >= self.marginal.support_radius() {
            return Ok(0.0);
        }
        Ok(2.0 * self.integrate_to_edge(v.max(0.0), |r| r, quad)?)
    }

    /// `P(|X| ≥ u) = 2∫_u^R f`.
    fn tail_probability(&self, u: f64, quad: &QuadratureSpec) -> Result<f64> {
        if u >= self.marginal.support_radius() {
            return Ok(0.0);
        }
        Ok(2.0 * self.integrate_to_edge(u.max(0.0), |_| 1.0, quad)?)
    }

    /// `P(|X| ≥ R − d)` for a density with an edge exponent, from `d` itself.
    fn edge_tail(&self, d: f64, a: f64, quad: &QuadratureSpec) -> Result<f64> {
        if d <= 0.0 {
            return Ok(0.0);
        }
        Ok(2.0 * edge_quad(d, a, |x| self.marginal.density_from_edge(x), quad)?)
    }

    /// `∫_lo^R w(r) f(r) dr`.
    fn integrate_to_edge(&self, lo: f64, w: impl Fn(f64) -> f64, quad: &QuadratureSpec) -> Result<f64> {
        let f = &self.marginal;
        let r = f.support_radius();
        match f.edge_exponent() {
            Some(a) => edge_quad(r - lo, a, |d| w(r - d) * f.density_from_edge(d), quad),
            None => quad_with_breaks(|t| w(t) * f.density(t), &self.breaks_from(lo), quad),
        }
    }

    /// Outer breakpoints in `t` induced by marginal breakpoints `b` (at `t = 1/b`).
    fn outer_breaks(&self, s: f64) -> Vec<f64> {
        let r = self.marginal.support_radius();
        let lo = 1.0 / r;
        let mut pts = vec![lo];
        let mut inner: Vec<f64> =
            self.marginal.breakpoints().into_iter().filter(|&b| b > 0.0 && b < r).map(|b| 1.0 / b).filter(|&t| t < s).collect();
        inner.sort_by(f64::total_cmp);
        pts.extend(inner);
        pts.push(s);
        pts
    }
}

fn check_argument(s: f64) -> Result<()> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("Orlicz argument must be finite and nonnegative, got {s}")));
    }
    Ok(())
}

/// `∫_0^span g(d) dd` for `g` vanishing like `d^a`, over `x ∈ [0, 1]` with
/// `d = span·x^q` and `q a ≥ 4`, which leaves a smooth integrand at `d = 0`.
fn edge_quad(span: f64, a: f64, mut g: impl FnMut(f64) -> f64, quad: &QuadratureSpec) -> Result<f64> {
    let q = (4.0 / a).ceil().clamp(1.0, 64.0);
    quad_adaptive(|x| g(span * x.powf(q)) * q * span * x.powf(q - 1.0), Interval::new(0.0, 1.0)?, quad)
}

/// `M(s) = ∫_0^s E[|X| 1{|X| ≥ 1/t}] dt`, as written: an outer quadrature
/// in `t` over an inner quadrature for the truncated first moment.
pub fn m_from_tail(spec: &MTailSpec, s: f64) -> Result<f64> {
    check_argument(s)?;
    let r = spec.marginal.support_radius();
    if s * r <= 1.0 {
        return Ok(0.0);
    }
    let inner = spec.quad.tightened(10.0);
    let mut failure = None;
    let value = quad_with_breaks(
        |t| match spec.truncated_moment(1.0 / t, &inner) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        &spec.outer_breaks(s),
        &spec.quad,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// The same `M(s)` from tail probabilities:
/// `∫_0^s [ (1/t) P(|X| ≥ 1/t) + ∫_{1/t}^∞ P(|X| ≥ u) du ] dt`,
/// three nested quadratures deep.
pub fn m_from_tail_alt(spec: &MTailSpec, s: f64) -> Result<f64> {
    check_argument(s)?;
    let r = spec.marginal.support_radius();
    if s * r <= 1.0 {
        return Ok(0.0);
    }
    let middle = spec.quad.tightened(10.0);
    let inner = spec.quad.tightened(100.0);
    let mut failure = None;
    let mut record = |res: Result<f64>| match res {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let value = quad_with_breaks(
        |t| {
            let v = 1.0 / t;
            let p_v = record(spec.tail_probability(v, &middle));
            // P(|X| ≥ u) ≤ P(|X| ≥ v) on the whole range, which fixes the
            // scale of the inner integrals near the support edge.
            let inner = QuadratureSpec { abs_tol: inner.abs_tol.max(inner.rel_tol * p_v), ..inner };
            let mut inner_failure = None;
            let mut keep = |res: Result<f64>| match res {
                Ok(p) => p,
                Err(e) => {
                    inner_failure.get_or_insert(e);
                    0.0
                }
            };
            let body = match spec.marginal.edge_exponent() {
                Some(a) => edge_quad(r - v, a + 1.0, |d| keep(spec.edge_tail(d, a, &inner)), &middle),
                None => quad_with_breaks(|u| keep(spec.tail_probability(u, &inner)), &spec.breaks_from(v), &middle),
            };
            let body = match (body, inner_failure) {
                (Ok(b), None) => Ok(b),
                (Err(e), _) | (_, Some(e)) => Err(e),
            };
            p_v / t + record(body)
        },
        &spec.outer_breaks(s),
        &spec.quad,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// `M(s) = E[(s|X| − 1)_+] = 2∫_{1/s}^R (s r − 1) f(r) dr`, the single-integral
/// form of the tail integral. Exact for uniform and histogram marginals.
pub fn m_tail_exact(spec: &MTailSpec, s: f64) -> Result<f64> {
    check_argument(s)?;
    let r = spec.marginal.support_radius();
    if s * r <= 1.0 {
        return Ok(0.0);
    }
    let c0 = 1.0 / s;
    match spec.marginal.shape() {
        MarginalShape::Uniform { half_width } => Ok(bin_term(s, c0, *half_width, 0.5 / half_width)),
        MarginalShape::Histogram { edges, heights } => {
            let terms = edges.windows(2).zip(heights).filter(|(w, _)| w[1] > c0).map(|(w, &h)| {
                let c = w[0].max(c0);
                bin_term(s, c, w[1], h)
            });
            Ok(neumaier_sum(terms))
        }
        _ => {
            let f = &spec.marginal;
            Ok(2.0 * quad_with_breaks(|x| (s * x - 1.0) * f.density(x), &spec.breaks_from(c0), &spec.quad)?)
        }
    }
}

/// `2h ∫_c^b (s r − 1) dr` for `c ≥ 1/s`.
fn bin_term(s: f64, c: f64, b: f64, h: f64) -> f64 {
    let at_c = if c * s <= 1.0 { 0.0 } else { s * c - 1.0 };
    h * (b - c) * ((s * b - 1.0) + at_c)
}

/// The law of `|V|` for a finite sample of `V`, with suffix sums for exact
/// evaluation of its Orlicz function.
#[derive(Debug, Clone)]
pub struct EmpiricalLaw {
    sorted: Vec<f64>,
    suffix: Vec<f64>,
}

impl EmpiricalLaw {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("empirical law needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("empirical values must be finite"));
        }
        let mut sorted: Vec<f64> = values.into_iter().map(f64::abs).collect();
        sorted.sort_by(f64::total_cmp);
        let mut suffix = vec![0.0; sorted.len() + 1];
        for i in (0..sorted.len()).rev() {
            suffix[i] = suffix[i + 1] + sorted[i];
        }
        if sorted[sorted.len() - 1] == 0.0 {
            return Err(Error::Estimation("all values are zero".into()));
        }
        Ok(Self { sorted, suffix })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// `(1/m) Σ (s v_i − 1)_+`.
    pub fn m(&self, s: f64) -> f64 {
        let cut = 1.0 / s;
        let k = self.sorted.partition_point(|&v| v <= cut);
        let above = (self.sorted.len() - k) as f64;
        if above == 0.0 {
            return 0.0;
        }
        ((s * self.suffix[k] - above) / self.sorted.len() as f64).max(0.0)
    }
}

/// Exact `M(s)` of the empirical law of `|projections|`.
pub fn m_empirical(projections: &[f64], s: f64) -> Result<f64> {
    check_argument(s)?;
    Ok(EmpiricalLaw::new(projections.to_vec())?.m(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{coordinate_marginal, project_samples, BodySpec, Direction};

    fn cube_spec() -> MTailSpec {
        MTailSpec::new(MarginalDensity::uniform(0.5).unwrap(), QuadratureSpec::relative(1e-11))
    }

    // Uniform on [−1/2, 1/2]: E[|X|1{|X| ≥ 1/t}] = 1/4 − 1/t² for t ≥ 2, so
    // M(4) = ∫_2^4 (1/4 − 1/t²) dt = 1/2 − 1/4.
    const CUBE_M4: f64 = 0.25;

    #[test]
    fn zero_argument_and_below_threshold() {
        let spec = cube_spec();
        assert_eq!(m_from_tail(&spec, 0.0).unwrap(), 0.0);
        assert_eq!(m_from_tail_alt(&spec, 0.0).unwrap(), 0.0);
        assert_eq!(m_from_tail(&spec, 2.0).unwrap(), 0.0);
        assert_eq!(m_tail_exact(&spec, 1.5).unwrap(), 0.0);
        assert!(m_from_tail(&spec, -1.0).is_err());
    }

    #[test]
    fn uniform_hand_value() {
        let spec = cube_spec();
        assert!((m_from_tail(&spec, 4.0).unwrap() - CUBE_M4).abs() < 1e-10);
        assert!((m_from_tail_alt(&spec, 4.0).unwrap() - CUBE_M4).abs() < 1e-10);
        assert!((m_tail_exact(&spec, 4.0).unwrap() - CUBE_M4).abs() < 1e-15);
    }

    #[test]
    fn uniform_closed_form_across_arguments() {
        let spec = cube_spec();
        for &s in &[2.001f64, 2.5, 7.0, 100.0, 1e5] {
            let exact: f64 = (0.5 * s - 1.0).powi(2) / s;
            assert!((m_tail_exact(&spec, s).unwrap() / exact - 1.0).abs() < 1e-13, "s={s}");
            assert!((m_from_tail(&spec, s).unwrap() / exact - 1.0).abs() < 1e-9, "s={s}");
        }
    }

    #[test]
    fn representations_agree_on_random_bodies() {
        let mut state = 0x1234_5678u64;
        let mut next = || {
            state = crate::rng::mix64(state);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..24 {
            let p = 1.0 + 5.0 * next();
            let n = 2 + (next() * 22.0) as usize;
            let body = BodySpec::normalized(p, n).unwrap();
            let r = body.scale();
            let s = (1.0 + 9.0 * next()) / r;
            let spec = MTailSpec::new(coordinate_marginal(&body), QuadratureSpec::relative(1e-10));
            let a = m_from_tail(&spec, s).unwrap();
            let b = m_from_tail_alt(&spec, s).unwrap();
            let c = m_tail_exact(&spec, s).unwrap();
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-300), "p={p} n={n} s={s}: {a} vs {b}");
            assert!((a - c).abs() <= 1e-8 * a.abs().max(1e-300), "p={p} n={n} s={s}: {a} vs {c}");
        }
    }

    #[test]
    fn histogram_exact_matches_quadrature() {
        let edges = vec![0.0, 0.1, 0.25, 0.4];
        let heights = vec![2.0, 1.2, 0.5];
        let m = MarginalDensity::histogram(edges, heights, 3).unwrap();
        let spec = MTailSpec::new(m, QuadratureSpec::relative(1e-12));
        for &s in &[3.0, 5.0, 9.0, 12.0, 40.0] {
            let exact = m_tail_exact(&spec, s).unwrap();
            let nested = m_from_tail(&spec, s).unwrap();
            assert!((exact - nested).abs() <= 1e-10 * exact.max(1e-300), "s={s}: {exact} vs {nested}");
        }
    }

    #[test]
    fn empirical_point_mass() {
        let v = 0.4;
        assert_eq!(m_empirical(&[v], 2.0).unwrap(), 0.0);
        assert_eq!(m_empirical(&[-v], 2.5).unwrap(), 0.0);
        let s = 7.0;
        assert!((m_empirical(&[v], s).unwrap() - v * (s - 1.0 / v)).abs() < 1e-15);
        assert!(m_empirical(&[], 1.0).is_err());
    }

    #[test]
    fn empirical_cube_sample() {
        let body = BodySpec::normalized(f64::INFINITY, 1).unwrap();
        let proj = project_samples(&body, &Direction::canonical(1, 0).unwrap(), 1_000_000, 3).unwrap();
        let v = m_empirical(&proj, 4.0).unwrap();
        assert!((v - CUBE_M4).abs() < 1e-3, "{v}");
    }

    #[test]
    fn empirical_converges_to_closed_form() {
        let body = BodySpec::normalized(2.0, 10).unwrap();
        let spec = MTailSpec::new(coordinate_marginal(&body), QuadratureSpec::relative(1e-10));
        let r = body.scale();
        let grid: Vec<f64> = (1..=20).map(|i| (1.0 + 0.5 * i as f64) / r).collect();
        let exact: Vec<f64> = grid.iter().map(|&s| m_tail_exact(&spec, s).unwrap()).collect();
        let theta = Direction::canonical(10, 0).unwrap();
        let mut errors = Vec::new();
        for k in [3u32, 4, 5, 6] {
            let proj = project_samples(&body, &theta, 10usize.pow(k), 40 + k as u64).unwrap();
            let law = EmpiricalLaw::new(proj).unwrap();
            let sup = grid.iter().zip(&exact).map(|(&s, &e)| (law.m(s) - e).abs()).fold(0.0, f64::max);
            errors.push(sup);
        }
        assert!(errors[3] < 5e-3, "{errors:?}");
        assert!(errors[3] < errors[0], "{errors:?}");
    }
}
