use std::fmt;
use std::sync::Arc;

use statrs::function::beta::checked_beta_reg;

use super::{project_samples, BodySpec, Direction};
use crate::mathkit::{quad_with_breaks, QuadratureSpec};
use crate::{Error, Result};

/// How a [`MarginalDensity`] is represented.
#[derive(Clone)]
pub enum MarginalShape {
    /// Coordinate marginal of `λ B_p^n` for finite `p`:
    /// `|B_p^{n-1}|/(λ|B_p^n|) · (1 − |t/λ|^p)^{(n−1)/p}`.
    PBall { p: f64, n: usize, lambda: f64, log_coef: f64 },
    /// Uniform on `[−half_width, half_width]`.
    Uniform { half_width: f64 },
    /// Even, piecewise constant: `heights[i]` on `edges[i] ≤ |t| < edges[i+1]`.
    Histogram { edges: Vec<f64>, heights: Vec<f64> },
    /// Caller-supplied even density, evaluated at `|t|`.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for MarginalShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PBall { p, n, lambda, .. } => write!(f, "PBall {{ p: {p}, n: {n}, lambda: {lambda} }}"),
            Self::Uniform { half_width } => write!(f, "Uniform {{ half_width: {half_width} }}"),
            Self::Histogram { edges, .. } => write!(f, "Histogram {{ bins: {} }}", edges.len() - 1),
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Density of `⟨X, θ⟩` for `X` uniform in a symmetric convex body.
///
/// Even, nonincreasing on `[0, R]` and zero beyond `R = support_radius`.
#[derive(Debug, Clone)]
pub struct MarginalDensity {
    shape: MarginalShape,
    support_radius: f64,
    dim: usize,
    body: Option<BodySpec>,
    direction: Option<Direction>,
}

impl MarginalDensity {
    /// Uniform marginal on `[−half_width, half_width]` (the cube's coordinate law).
    pub fn uniform(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::domain(format!("half width must be positive, got {half_width}")));
        }
        Ok(Self {
            shape: MarginalShape::Uniform { half_width },
            support_radius: half_width,
            dim: 1,
            body: None,
            direction: None,
        })
    }

    /// Even piecewise-constant density on `[0, edges.last()]`.
    pub fn histogram(edges: Vec<f64>, heights: Vec<f64>, dim: usize) -> Result<Self> {
        if edges.len() < 2 || heights.len() + 1 != edges.len() {
            return Err(Error::domain("histogram needs k+1 edges for k heights, k >= 1"));
        }
        if edges[0] != 0.0 || edges.windows(2).any(|w| !(w[1] > w[0])) || !edges[edges.len() - 1].is_finite() {
            return Err(Error::domain("histogram edges must start at 0 and increase strictly"));
        }
        if heights.iter().any(|h| !(*h >= 0.0) || !h.is_finite()) {
            return Err(Error::domain("histogram heights must be finite and nonnegative"));
        }
        let support_radius = edges[edges.len() - 1];
        Ok(Self { shape: MarginalShape::Histogram { edges, heights }, support_radius, dim, body: None, direction: None })
    }

    /// A caller-supplied even density `f(|t|)`, zero beyond `support_radius`.
    /// `dim` is the dimension of the body it came from.
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, support_radius: f64, dim: usize) -> Result<Self> {
        if !(support_radius > 0.0) || !support_radius.is_finite() {
            return Err(Error::domain(format!("support radius must be positive, got {support_radius}")));
        }
        if dim == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        Ok(Self { shape: MarginalShape::Custom(Arc::new(f)), support_radius, dim, body: None, direction: None })
    }

    pub fn with_origin(mut self, body: BodySpec, direction: Option<Direction>) -> Self {
        self.dim = body.n();
        self.body = Some(body);
        self.direction = direction;
        self
    }

    pub fn shape(&self) -> &MarginalShape {
        &self.shape
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn body(&self) -> Option<&BodySpec> {
        self.body.as_ref()
    }

    pub fn direction(&self) -> Option<&Direction> {
        self.direction.as_ref()
    }

    pub fn density(&self, t: f64) -> f64 {
        let a = t.abs();
        if a > self.support_radius {
            return 0.0;
        }
        match &self.shape {
            MarginalShape::PBall { p, n, lambda, log_coef } => {
                if *n == 1 {
                    return log_coef.exp();
                }
                let u = (a / lambda).powf(*p);
                if u >= 1.0 {
                    return 0.0;
                }
                (log_coef + (*n as f64 - 1.0) / p * (-u).ln_1p()).exp()
            }
            MarginalShape::Uniform { half_width } => 0.5 / half_width,
            MarginalShape::Histogram { edges, heights } => {
                let i = edges.partition_point(|&e| e <= a).clamp(1, heights.len());
                heights[i - 1]
            }
            MarginalShape::Custom(f) => f(a),
        }
    }

    /// The density at `R − d`, accurate for `d` small against `R`.
    pub(crate) fn density_from_edge(&self, d: f64) -> f64 {
        match &self.shape {
            MarginalShape::PBall { p, n, lambda, log_coef } if *n > 1 => {
                if d <= 0.0 {
                    return 0.0;
                }
                let gap = -(p * (-d / lambda).ln_1p()).exp_m1();
                (log_coef + (*n as f64 - 1.0) / p * gap.ln()).exp()
            }
            _ => self.density(self.support_radius - d),
        }
    }

    /// `a` when the density vanishes like `(R − |t|)^a` at the support edge.
    pub(crate) fn edge_exponent(&self) -> Option<f64> {
        match &self.shape {
            MarginalShape::PBall { p, n, .. } if *n > 1 => Some((*n as f64 - 1.0) / p),
            _ => None,
        }
    }

    /// Points of `[0, R]` where the density may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            MarginalShape::Histogram { edges, .. } => edges.clone(),
            _ => vec![0.0, self.support_radius],
        }
    }

    /// `∫ f` over `[−R, R]`.
    pub fn total_mass(&self, spec: &QuadratureSpec) -> Result<f64> {
        Ok(2.0 * quad_with_breaks(|t| self.density(t), &self.breakpoints(), spec)?)
    }
}

/// The coordinate marginal of `body` as a closed-form density.
pub fn coordinate_marginal(body: &BodySpec) -> MarginalDensity {
    let lambda = body.scale();
    let shape = if body.is_cube() {
        MarginalShape::Uniform { half_width: lambda }
    } else {
        MarginalShape::PBall { p: body.p(), n: body.n(), lambda, log_coef: body.section_ratio().ln() - lambda.ln() }
    };
    MarginalDensity { shape, support_radius: lambda, dim: body.n(), body: Some(*body), direction: None }
}

/// Density of `⟨X, e_j⟩` at `t` for `X` uniform in `body`.
pub fn marginal_coordinate(body: &BodySpec, t: f64) -> f64 {
    coordinate_marginal(body).density(t)
}

/// `P(⟨X, e_j⟩ ≤ t)`, via `|X_j|/λ ~ Beta(1/p, (n−1)/p + 1)^{1/p}`.
pub fn coordinate_cdf(body: &BodySpec, t: f64) -> f64 {
    let lambda = body.scale();
    let a = (t.abs() / lambda).min(1.0);
    let inner = if body.is_cube() {
        a
    } else {
        let p = body.p();
        let b = (body.n() as f64 - 1.0) / p + 1.0;
        checked_beta_reg(1.0 / p, b, a.powf(p)).unwrap_or(if a >= 1.0 { 1.0 } else { 0.0 })
    };
    0.5 + 0.5 * inner.copysign(t)
}

/// Empirical marginal along `theta` from `samples` uniform points.
///
/// The folded projections `|⟨X_i, θ⟩|` are binned on `[0, max]` with the
/// Freedman–Diaconis width (rounded so the bins tile the range exactly),
/// then projected onto nonincreasing step functions by pool-adjacent-violators.
pub fn marginal_general(body: &BodySpec, theta: &Direction, samples: usize, seed: u64) -> Result<MarginalDensity> {
    if samples < 10_000 {
        return Err(Error::domain(format!("empirical marginal needs at least 10^4 samples, got {samples}")));
    }
    let mut proj = project_samples(body, theta, samples, seed)?;
    proj.sort_by(f64::total_cmp);
    let (edges, heights) = folded_histogram(&proj)?;
    Ok(MarginalDensity::histogram(edges, heights, body.n())?.with_origin(*body, Some(theta.clone())))
}

/// Nonincreasing histogram of sorted nonnegative values, normalized so the
/// even extension has unit mass.
pub(crate) fn folded_histogram(sorted: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = sorted.len();
    let max = sorted[m - 1];
    let q = |f: f64| sorted[((m - 1) as f64 * f).round() as usize];
    let iqr = q(0.75) - q(0.25);
    if !(max > 0.0) || !(iqr > 0.0) {
        return Err(Error::Estimation("projections are degenerate (all equal)".into()));
    }
    let fd = 2.0 * iqr / (m as f64).cbrt();
    let bins = ((max / fd).ceil() as usize).max(1);
    let width = max / bins as f64;
    let mut counts = vec![0.0f64; bins];
    for &v in sorted {
        let i = ((v / width) as usize).min(bins - 1);
        counts[i] += 1.0;
    }
    let norm = 2.0 * m as f64 * width;
    let raw: Vec<f64> = counts.iter().map(|c| c / norm).collect();
    let heights = pava_nonincreasing(&raw);
    let edges = (0..=bins).map(|i| if i == bins { max } else { i as f64 * width }).collect();
    Ok((edges, heights))
}

/// Least-squares nonincreasing fit with equal weights.
fn pava_nonincreasing(y: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, c2) = blocks[blocks.len() - 1];
            let (m1, c1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.pop();
            let c = c1 + c2;
            *blocks.last_mut().unwrap() = ((m1 * c1 as f64 + m2 * c2 as f64) / c as f64, c);
        }
    }
    blocks.into_iter().flat_map(|(m, c)| std::iter::repeat(m).take(c)).collect()
}
