use rayon::prelude::*;

use super::support::{check_grid, trial_key};
use super::{expected_support_orlicz, EstimateReport, McSummary};
use crate::bodies::{map_point_blocks, sample_sphere, sphere_point, BodySpec, Direction, PointSampler};
use crate::mathkit::neumaier_sum;
use crate::orlicz::{invert_for_support, OrliczFunction};
use crate::rng::{self, tag};
use crate::{Error, Result};

/// Projection samples behind each direction's empirical marginal.
pub(crate) const WIDTH_SAMPLES: usize = 200_000;

/// Buffer cap (in `f64`s) for projections held at once.
const PROJECTION_BUDGET: usize = 1 << 25;

/// A direction average of Orlicz estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanWidthEstimate {
    pub n_points: u64,
    pub value: f64,
    /// Standard error of the direction average; zero when exact.
    pub std_error: f64,
    /// Directions actually averaged.
    pub n_dirs: usize,
}

/// `|⟨x, θ⟩|` for a shared cloud of `samples` points and every direction
/// of `dirs`, calling `f` on each direction's projections.
///
/// Directions are handled in chunks that fit the projection budget; each
/// chunk regenerates the same cloud.
pub(crate) fn for_each_projection<T: Send>(
    body: &BodySpec,
    dirs: &[Direction],
    samples: usize,
    seed: u64,
    f: impl Fn(Vec<f64>) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let n = body.n();
    let chunk = (PROJECTION_BUDGET / samples).max(1);
    let cloud_seed = rng::derive(seed, tag::MARGINAL);
    let mut out = Vec::with_capacity(dirs.len());
    for group in dirs.chunks(chunk) {
        let blocks = map_point_blocks(body, samples, cloud_seed, |b| {
            group.iter().map(|d| b.chunks_exact(n).map(|x| d.dot(x).abs()).collect::<Vec<f64>>()).collect::<Vec<_>>()
        });
        let per_dir: Vec<Vec<f64>> =
            (0..group.len()).map(|k| blocks.iter().flat_map(|b| b[k].iter().copied()).collect()).collect();
        let results: Vec<Result<T>> = per_dir.into_par_iter().map(&f).collect();
        for r in results {
            out.push(r?);
        }
    }
    Ok(out)
}

/// Orlicz estimates of `E w(K_N)` for every `N` in `ns`.
///
/// For the Euclidean ball the coordinate estimate is exact for every
/// direction. Otherwise `n_dirs` uniform directions are averaged, each
/// estimated by inverting the Orlicz function of the empirical law of
/// `samples` projections of one shared point cloud.
pub fn mean_width_orlicz_scan(
    body: &BodySpec,
    ns: &[u64],
    n_dirs: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<MeanWidthEstimate>> {
    check_grid(ns)?;
    if body.p() == 2.0 || body.n() == 1 {
        let e1 = Direction::canonical(body.n(), 0)?;
        return ns
            .iter()
            .map(|&n| {
                Ok(MeanWidthEstimate { n_points: n, value: expected_support_orlicz(body, &e1, n)?, std_error: 0.0, n_dirs: 1 })
            })
            .collect();
    }
    if n_dirs < 100 {
        return Err(Error::domain(format!("mean width needs at least 100 directions, got {n_dirs}")));
    }
    let last = *ns.last().expect("checked grid");
    if (samples as u64) < 10 * last {
        return Err(Error::Estimation(format!("{samples} projection samples cannot resolve the level 1/{last}")));
    }
    let dirs = sample_sphere(body.n(), n_dirs, seed)?;
    let per_dir = for_each_projection(body, &dirs, samples, seed, |proj| {
        let m = OrliczFunction::empirical(proj)?;
        ns.iter().map(|&n| invert_for_support(&m, n)).collect::<Result<Vec<f64>>>()
    })?;
    Ok(ns
        .iter()
        .enumerate()
        .map(|(k, &n_points)| {
            let values: Vec<f64> = per_dir.iter().map(|v| v[k]).collect();
            let s = McSummary::from_values(&values).expect("at least 100 directions");
            MeanWidthEstimate { n_points, value: s.mean, std_error: s.std_error(), n_dirs }
        })
        .collect())
}

/// Orlicz estimate of `E w(K_N)`, the direction average of
/// `expected_support_orlicz`.
pub fn mean_width_orlicz(body: &BodySpec, n_points: u64, n_dirs: usize, seed: u64) -> Result<MeanWidthEstimate> {
    Ok(mean_width_orlicz_scan(body, &[n_points], n_dirs, WIDTH_SAMPLES, seed)?.remove(0))
}

/// Monte Carlo `E w(K_N)` for every `N` in `ns`.
///
/// Trial `t` draws `max(ns)` points and `n_dirs` fresh directions, and
/// averages `h_{K_N}(θ) = max_i |⟨X_i, θ⟩|` over the directions; smaller `N`
/// use prefixes of the same points.
pub fn mean_width_mc_scan(body: &BodySpec, ns: &[u64], trials: usize, n_dirs: usize, seed: u64) -> Result<Vec<Option<McSummary>>> {
    check_grid(ns)?;
    if n_dirs == 0 {
        return Err(Error::domain("mean width needs at least one direction"));
    }
    let n = body.n();
    let last = *ns.last().expect("checked grid") as usize;
    let sampler = PointSampler::new(body);
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let key = trial_key(seed, t);
            let mut drng = rng::stream(rng::derive(key, tag::DIRECTIONS), 0);
            let dirs: Vec<Direction> = (0..n_dirs).map(|_| sphere_point(n, &mut drng)).collect();
            let mut max = vec![0.0f64; n_dirs];
            let mut out = Vec::with_capacity(ns.len());
            let (mut seen, mut next) = (0u64, 0usize);
            sampler.for_prefix(key, last, |block| {
                for x in block.chunks_exact(n) {
                    for (m, d) in max.iter_mut().zip(&dirs) {
                        *m = m.max(d.dot(x).abs());
                    }
                    seen += 1;
                    if seen == ns[next] {
                        out.push(neumaier_sum(max.iter().copied()) / n_dirs as f64);
                        next += 1;
                    }
                }
            });
            out
        })
        .collect();
    Ok((0..ns.len())
        .map(|k| McSummary::from_values(&per_trial.iter().map(|v| v[k]).collect::<Vec<_>>()))
        .collect())
}

/// Monte Carlo `E w(K_N)` with its Orlicz estimate (averaged over at least
/// 100 directions when the body is not a ball).
pub fn mean_width_mc(body: &BodySpec, n_points: u64, trials: usize, n_dirs: usize, seed: u64) -> Result<EstimateReport> {
    let orlicz = mean_width_orlicz(body, n_points, n_dirs.max(100), seed)?;
    let mc = mean_width_mc_scan(body, &[n_points], trials, n_dirs, seed)?.remove(0);
    Ok(EstimateReport { n_points, orlicz_value: orlicz.value, mc, seed })
}
