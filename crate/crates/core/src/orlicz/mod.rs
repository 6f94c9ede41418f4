//! Orlicz functions built from one-dimensional laws, and what is done with
//! them: inversion at level `1/N`, Luxemburg norms, Legendre duals.

mod ops;
mod pball;
mod tail;

pub use ops::{invert_for_support, legendre_dual, luxemburg_norm, INVERSION_BRACKET};
pub use pball::{
    m_pball_first, m_pball_first_terms, m_pball_second, m_pball_second_terms, m_spherical, m_spherical_defining,
    PBallSpec,
};
pub use tail::{m_empirical, m_from_tail, m_from_tail_alt, m_tail_exact, EmpiricalLaw, MTailSpec};

pub(crate) use pball::m_spherical_sorted;

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::bodies::MarginalDensity;
use crate::io::float17;
use crate::mathkit::QuadratureSpec;
use crate::{Error, Result};

/// Which construction produced an [`OrliczFunction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrliczKind {
    TailIntegral,
    PBallFirst,
    PBallSecond,
    Spherical,
    Empirical,
    Power,
    Dual,
    Custom,
}

impl OrliczKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::TailIntegral => "tail-integral",
            Self::PBallFirst => "pball-closed-form-1",
            Self::PBallSecond => "pball-closed-form-2",
            Self::Spherical => "spherical",
            Self::Empirical => "empirical",
            Self::Power => "power",
            Self::Dual => "dual",
            Self::Custom => "custom",
        }
    }
}

type Eval = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// A convex, nondecreasing `M: [0, ∞) → [0, ∞)` with `M(0) = 0`, vanishing
/// exactly on `[0, zero_threshold]`.
#[derive(Clone)]
pub struct OrliczFunction {
    kind: OrliczKind,
    zero_threshold: f64,
    eval: Eval,
}

impl fmt::Debug for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrliczFunction")
            .field("kind", &self.kind)
            .field("zero_threshold", &self.zero_threshold)
            .finish_non_exhaustive()
    }
}

impl OrliczFunction {
    /// Wraps an arbitrary evaluator. Arguments are validated before `eval`
    /// sees them, and `eval` is never called at or below `zero_threshold`.
    pub fn new(
        kind: OrliczKind,
        zero_threshold: f64,
        eval: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(zero_threshold >= 0.0) || !zero_threshold.is_finite() {
            return Err(Error::domain(format!("zero threshold must be finite and nonnegative, got {zero_threshold}")));
        }
        Ok(Self { kind, zero_threshold, eval: Arc::new(eval) })
    }

    /// `M(t) = t^q`.
    pub fn power(q: f64) -> Result<Self> {
        Self::scaled_power(q, 1.0)
    }

    /// `M(t) = c·t^q`.
    pub fn scaled_power(q: f64, c: f64) -> Result<Self> {
        if !(q >= 1.0) || !q.is_finite() || !(c > 0.0) || !c.is_finite() {
            return Err(Error::domain(format!("power function needs q >= 1 and c > 0, got q={q}, c={c}")));
        }
        Self::new(OrliczKind::Power, 0.0, move |t| Ok(c * t.powf(q)))
    }

    /// `M(s) = E[(s|X| − 1)_+]` for `X` with the given marginal density.
    ///
    /// Histogram and uniform marginals are evaluated exactly bin by bin;
    /// closed-form and custom densities by one adaptive quadrature.
    pub fn tail_integral(marginal: MarginalDensity, quad: QuadratureSpec) -> Result<Self> {
        let threshold = 1.0 / marginal.support_radius();
        let spec = MTailSpec { marginal, quad };
        Self::new(OrliczKind::TailIntegral, threshold, move |s| m_tail_exact(&spec, s))
    }

    /// The coordinate Orlicz function of `D_p^n` via the first closed form.
    pub fn pball_first(spec: PBallSpec) -> Result<Self> {
        let threshold = 1.0 / spec.support_radius();
        Self::new(OrliczKind::PBallFirst, threshold, move |t| spec.first(1.0 / t))
    }

    /// The coordinate Orlicz function of `D_p^n` via the second closed form.
    pub fn pball_second(spec: PBallSpec) -> Result<Self> {
        let threshold = 1.0 / spec.support_radius();
        Self::new(OrliczKind::PBallSecond, threshold, move |t| spec.second(1.0 / t))
    }

    /// `s ↦ M_{⟨θ, e_1⟩}(s)` for `θ` uniform on `S^{n−1}`.
    pub fn spherical(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("spherical Orlicz function needs n >= 2"));
        }
        Self::new(OrliczKind::Spherical, 1.0, move |s| m_spherical(n, s))
    }

    /// The Orlicz function of the empirical law of `|values|`.
    pub fn empirical(values: Vec<f64>) -> Result<Self> {
        let law = EmpiricalLaw::new(values)?;
        let threshold = 1.0 / law.max();
        Self::new(OrliczKind::Empirical, threshold, move |s| Ok(law.m(s)))
    }

    pub fn kind(&self) -> OrliczKind {
        self.kind
    }

    /// Largest `t₀` with `M ≡ 0` on `[0, t₀]`.
    pub fn zero_threshold(&self) -> f64 {
        self.zero_threshold
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("Orlicz functions take nonnegative arguments, got {t}")));
        }
        if t <= self.zero_threshold {
            return Ok(0.0);
        }
        if t.is_infinite() {
            return Ok(f64::INFINITY);
        }
        (self.eval)(t)
    }

    /// `(t, M(t))` at `points` log-spaced arguments in `[t_min, t_max]`.
    pub fn tabulate(&self, t_min: f64, t_max: f64, points: usize) -> Result<Vec<(f64, f64)>> {
        if !(t_min > 0.0) || !(t_max > t_min) || !t_max.is_finite() || points < 2 {
            return Err(Error::domain("tabulation needs 0 < t_min < t_max and at least 2 points"));
        }
        let (a, b) = (t_min.ln(), t_max.ln());
        (0..points)
            .map(|i| {
                let t = if i == 0 {
                    t_min
                } else if i + 1 == points {
                    t_max
                } else { (a + (b - a) * i as f64 / (points - 1) as f64).exp() };
                Ok((t, self.eval(t)?))
            })
            .collect()
    }
}

/// Writes a tabulation as `t,M` CSV with 17 significant digits.
pub fn write_tabulation_csv<W: Write>(rows: &[(f64, f64)], mut w: W) -> std::io::Result<()> {
    writeln!(w, "t,M")?;
    for (t, m) in rows {
        writeln!(w, "{},{}", float17(*t), float17(*m))?;
    }
    Ok(())
}

/// Midpoint convexity and monotonicity on `points` equally spaced
/// arguments in `[0, t_max]`; returns the first violation found.
pub fn check_convexity(m: &OrliczFunction, t_max: f64, points: usize) -> Result<Option<String>> {
    let grid: Vec<f64> = (0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&t| m.eval(t)).collect::<Result<_>>()?;
    if values[0] != 0.0 {
        return Ok(Some(format!("M(0) = {} is not zero", values[0])));
    }
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for i in 1..points {
        if values[i] + 1e-12 * scale < values[i - 1] {
            return Ok(Some(format!("M decreases between {} and {}", grid[i - 1], grid[i])));
        }
    }
    for i in 0..points {
        for j in (i + 2..points).step_by(2) {
            let mid = values[(i + j) / 2];
            if mid > 0.5 * (values[i] + values[j]) + 1e-10 * scale {
                return Ok(Some(format!("midpoint convexity fails on [{}, {}]", grid[i], grid[j])));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_function_basics() {
        let m = OrliczFunction::power(2.0).unwrap();
        assert_eq!(m.eval(0.0).unwrap(), 0.0);
        assert_eq!(m.eval(3.0).unwrap(), 9.0);
        assert!(m.eval(-1.0).is_err());
        assert!(m.eval(f64::NAN).is_err());
        assert!(OrliczFunction::power(0.5).is_err());
        assert_eq!(check_convexity(&m, 5.0, 41).unwrap(), None);
    }

    #[test]
    fn convexity_checker_flags_concave_input() {
        let m = OrliczFunction::new(OrliczKind::Custom, 0.0, |t| Ok(t.sqrt())).unwrap();
        assert!(check_convexity(&m, 1.0, 21).unwrap().is_some());
    }

    #[test]
    fn tabulation_is_log_spaced() {
        let m = OrliczFunction::power(1.0).unwrap();
        let rows = m.tabulate(1e-2, 1e2, 5).unwrap();
        assert_eq!(rows.len(), 5);
        assert!((rows[2].0 - 1.0).abs() < 1e-15);
        assert_eq!(rows[4].0, 1e2);
        let mut out = Vec::new();
        write_tabulation_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("t,M\n1.0000000000000000e-2,"));
        assert!(m.tabulate(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn kind_labels() {
        assert_eq!(OrliczKind::PBallFirst.as_str(), "pball-closed-form-1");
        assert_eq!(OrliczKind::TailIntegral.as_str(), "tail-integral");
    }
}
