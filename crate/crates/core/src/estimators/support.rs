use rayon::prelude::*;

use super::{EstimateReport, McSummary};
use crate::bodies::{coordinate_marginal, marginal_general, BodySpec, Direction, PointSampler};
use crate::mathkit::QuadratureSpec;
use crate::orlicz::{invert_for_support, OrliczFunction, PBallSpec};
use crate::rng::{self, tag};
use crate::{Error, Result};

/// How `M_θ` is built when no closed form applies, and the quadrature used
/// when one does.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrliczOptions {
    /// Projection samples behind an empirical marginal.
    pub marginal_samples: usize,
    pub seed: u64,
    pub quad: QuadratureSpec,
}

impl Default for OrliczOptions {
    fn default() -> Self {
        Self { marginal_samples: 1_000_000, seed: 0, quad: QuadratureSpec::relative(1e-11) }
    }
}

/// The Orlicz function of `|⟨X, θ⟩|` for `X` uniform in `body`.
///
/// Coordinate directions of `D_p^n` (and every direction of a Euclidean
/// ball) use the first closed form; the cube and unnormalized bodies use the
/// exact tail integral of the coordinate marginal; anything else goes
/// through an empirical marginal of `opts.marginal_samples` projections.
pub fn orlicz_for_direction(body: &BodySpec, theta: &Direction, opts: &OrliczOptions) -> Result<OrliczFunction> {
    if theta.dim() != body.n() {
        return Err(Error::domain(format!("direction has dimension {}, body has dimension {}", theta.dim(), body.n())));
    }
    if theta.canonical_index().is_some() || body.p() == 2.0 {
        if body.is_normalized() && !body.is_cube() && body.n() >= 2 {
            return OrliczFunction::pball_first(PBallSpec::with_quad(body.p(), body.n(), opts.quad)?);
        }
        return OrliczFunction::tail_integral(coordinate_marginal(body), opts.quad);
    }
    let marginal = marginal_general(body, theta, opts.marginal_samples, rng::derive(opts.seed, tag::MARGINAL))?;
    OrliczFunction::tail_integral(marginal, opts.quad)
}

/// `inf{s > 0 : M_θ(1/s) ≤ 1/N}`, which is equivalent to `E h_{K_N}(θ)` up to
/// absolute constants.
pub fn expected_support_orlicz(body: &BodySpec, theta: &Direction, n_points: u64) -> Result<f64> {
    expected_support_orlicz_with(body, theta, n_points, &OrliczOptions::default())
}

pub fn expected_support_orlicz_with(
    body: &BodySpec,
    theta: &Direction,
    n_points: u64,
    opts: &OrliczOptions,
) -> Result<f64> {
    invert_for_support(&orlicz_for_direction(body, theta, opts)?, n_points)
}

/// One Monte Carlo experiment: `trials` independent polytopes on `n_points`
/// points each, observed in direction `direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeExperiment {
    pub body: BodySpec,
    pub n_points: u64,
    pub direction: Direction,
    pub trials: usize,
    pub seed: u64,
}

impl PolytopeExperiment {
    pub fn new(body: BodySpec, n_points: u64, direction: Direction, trials: usize, seed: u64) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::domain("N must be at least 1"));
        }
        if direction.dim() != body.n() {
            return Err(Error::domain("direction and body dimensions differ"));
        }
        Ok(Self { body, n_points, direction, trials, seed })
    }

    /// Non-fatal issues with the design of the experiment.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_points < self.body.n() as u64 {
            out.push(format!("N = {} is below the dimension {}", self.n_points, self.body.n()));
        }
        if self.trials > 0 && self.trials < 30 {
            out.push(format!("{} trials is too few for a normal-approximation interval", self.trials));
        }
        out
    }
}

/// The key of trial `t`; its points are the prefix-stable sequence under it.
pub(crate) fn trial_key(seed: u64, t: usize) -> u64 {
    rng::derive(rng::derive(seed, tag::TRIALS), t as u64)
}

pub(crate) fn check_grid(ns: &[u64]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::domain("the N grid is empty"));
    }
    if ns[0] == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("the N grid must be strictly increasing"));
    }
    Ok(())
}

/// `max_{i≤N} |⟨X_i, θ⟩|` at every `N` of the ascending `ns`, over one
/// trial's point sequence.
fn trial_maxima(sampler: &PointSampler, key: u64, theta: &Direction, ns: &[u64]) -> Vec<f64> {
    let n = theta.dim();
    let last = *ns.last().expect("nonempty grid") as usize;
    let mut out = Vec::with_capacity(ns.len());
    let mut next = 0;
    let mut seen = 0usize;
    let mut max = 0.0f64;
    sampler.for_prefix(key, last, |block| {
        for x in block.chunks_exact(n) {
            max = max.max(theta.dot(x).abs());
            seen += 1;
            if seen as u64 == ns[next] {
                out.push(max);
                next += 1;
            }
        }
    });
    out
}

/// Orlicz estimates and Monte Carlo oracles for every `N` in `ns`.
///
/// Trial `t` draws one sequence of `max(ns)` points; the statistic for a
/// smaller `N` uses its prefix, so every trial is nondecreasing in `N`.
pub fn support_scan(
    body: &BodySpec,
    theta: &Direction,
    ns: &[u64],
    trials: usize,
    seed: u64,
    opts: &OrliczOptions,
) -> Result<Vec<EstimateReport>> {
    check_grid(ns)?;
    let m = orlicz_for_direction(body, theta, opts)?;
    let orlicz: Vec<f64> = ns.iter().map(|&n| invert_for_support(&m, n)).collect::<Result<_>>()?;
    let sampler = PointSampler::new(body);
    let per_trial: Vec<Vec<f64>> =
        (0..trials).into_par_iter().map(|t| trial_maxima(&sampler, trial_key(seed, t), theta, ns)).collect();
    Ok(ns
        .iter()
        .enumerate()
        .map(|(k, &n_points)| {
            let values: Vec<f64> = per_trial.iter().map(|v| v[k]).collect();
            EstimateReport { n_points, orlicz_value: orlicz[k], mc: McSummary::from_values(&values), seed }
        })
        .collect())
}

/// The Monte Carlo mean of `max_{i≤N} |⟨X_i, θ⟩|` over `exp.trials`
/// polytopes, with its Orlicz estimate.
pub fn expected_support_mc(exp: &PolytopeExperiment) -> Result<EstimateReport> {
    let mut rows = support_scan(&exp.body, &exp.direction, &[exp.n_points], exp.trials, exp.seed, &OrliczOptions::default())?;
    Ok(rows.remove(0))
}
