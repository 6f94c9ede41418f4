use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;

use super::{BodySpec, Direction};
use crate::io::float17;
use crate::rng::{self, tag, BLOCK_SIZE};
use crate::{Error, Result};

/// Uniform points of a body, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    points: Vec<f64>,
    body: BodySpec,
    seed: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.points.len() / self.body.n()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.body.n()
    }

    pub fn body(&self) -> &BodySpec {
        &self.body
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let n = self.body.n();
        &self.points[i * n..(i + 1) * n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.body.n())
    }

    /// One point per row, `x1,…,xn` header, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.dim()).map(|j| format!("x{j}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for x in self.iter() {
            let row: Vec<String> = x.iter().map(|v| float17(*v)).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Sampler state for one body: the exact generalized-Gaussian representation
/// `x = λ g / (Σ|g_i|^p + W)^{1/p}` with `|g_i|^p ~ Gamma(1/p, 1)`,
/// `W ~ Exp(1)`; independent uniforms for the cube.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PointSampler {
    body: BodySpec,
    lambda: f64,
    gamma: Option<Gamma<f64>>,
}

impl PointSampler {
    pub(crate) fn new(body: &BodySpec) -> Self {
        let gamma = if body.is_cube() { None } else { Some(Gamma::new(1.0 / body.p(), 1.0).expect("positive shape")) };
        Self { body: *body, lambda: body.scale(), gamma }
    }

    pub(crate) fn fill(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let lambda = self.lambda;
        match self.gamma {
            None => {
                for x in out.iter_mut() {
                    *x = lambda * (2.0 * rng.random::<f64>() - 1.0);
                }
            }
            Some(gamma) => {
                let p = self.body.p();
                let mut total = 0.0;
                for x in out.iter_mut() {
                    let g: f64 = gamma.sample(rng);
                    total += g;
                    let mag = g.powf(1.0 / p);
                    *x = if rng.random::<bool>() { mag } else { -mag };
                }
                let w: f64 = Exp1.sample(rng);
                let k = lambda / (total + w).powf(1.0 / p);
                for x in out.iter_mut() {
                    *x *= k;
                }
            }
        }
    }

    /// Points `block·BLOCK_SIZE ..` of the sequence keyed by `key`.
    pub(crate) fn block(&self, key: u64, block: u64, len: usize, buf: &mut Vec<f64>) {
        let n = self.body.n();
        buf.resize(len * n, 0.0);
        let mut rng = rng::stream(key, block);
        for x in buf.chunks_exact_mut(n) {
            self.fill(&mut rng, x);
        }
    }

    /// Calls `f` on consecutive blocks of the first `count` points of the
    /// sequence keyed by `key`. A shorter sequence is a prefix of a longer one.
    pub(crate) fn for_prefix(&self, key: u64, count: usize, mut f: impl FnMut(&[f64])) {
        let mut buf = Vec::new();
        let mut done = 0;
        let mut block = 0;
        while done < count {
            let len = BLOCK_SIZE.min(count - done);
            self.block(key, block, len, &mut buf);
            f(&buf);
            done += len;
            block += 1;
        }
    }
}

fn block_count(count: usize) -> usize {
    count.div_ceil(BLOCK_SIZE)
}

/// Generates `count` uniform points of `body` in blocks, maps each block
/// (row-major slice) with `f` in parallel, and returns the block results in
/// order. Point `i` is the same for every `count > i` and every thread count.
pub fn map_point_blocks<T, F>(body: &BodySpec, count: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    let sampler = PointSampler::new(body);
    let key = rng::derive(seed, tag::POINTS);
    (0..block_count(count))
        .into_par_iter()
        .map(|b| {
            let len = BLOCK_SIZE.min(count - b * BLOCK_SIZE);
            let mut buf = Vec::new();
            sampler.block(key, b as u64, len, &mut buf);
            f(&buf)
        })
        .collect()
}

/// `count` i.i.d. uniform points of `body`, determined by `seed`.
pub fn sample_uniform(body: &BodySpec, count: usize, seed: u64) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let blocks = map_point_blocks(body, count, seed, |b| b.to_vec());
    Ok(SampleBatch { points: blocks.concat(), body: *body, seed })
}

/// `|⟨X_i, θ⟩|` for `count` uniform points (the same points as
/// [`sample_uniform`] with this seed).
pub fn project_samples(body: &BodySpec, theta: &Direction, count: usize, seed: u64) -> Result<Vec<f64>> {
    if theta.dim() != body.n() {
        return Err(Error::domain("direction and body dimensions differ"));
    }
    if count == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let n = body.n();
    let blocks = map_point_blocks(body, count, seed, |b| b.chunks_exact(n).map(|x| theta.dot(x).abs()).collect::<Vec<_>>());
    Ok(blocks.concat())
}

/// `count` i.i.d. uniform directions on `S^{n−1}` (normalized Gaussians).
pub fn sample_sphere(n: usize, count: usize, seed: u64) -> Result<Vec<Direction>> {
    if n == 0 || count == 0 {
        return Err(Error::domain("sphere dimension and count must be at least 1"));
    }
    let key = rng::derive(seed, tag::DIRECTIONS);
    let blocks: Vec<Vec<Direction>> = (0..block_count(count))
        .into_par_iter()
        .map(|b| {
            let len = BLOCK_SIZE.min(count - b * BLOCK_SIZE);
            let mut rng = rng::stream(key, b as u64);
            (0..len).map(|_| sphere_point(n, &mut rng)).collect()
        })
        .collect();
    Ok(blocks.concat())
}

pub(crate) fn sphere_point(n: usize, rng: &mut ChaCha8Rng) -> Direction {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return Direction::from_unit_unchecked(v.into_iter().map(|x| x / norm).collect());
        }
    }
}

/// Moment diagnostics of a uniform sample.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyReport {
    /// Sample mean of each coordinate.
    pub center: Vec<f64>,
    /// Sample `E x_j²` for each coordinate.
    pub second_moments: Vec<f64>,
    /// Largest `|E x_j x_{j+1}|` over cyclically adjacent coordinate pairs.
    /// The coordinates are exchangeable, so adjacent pairs represent all pairs.
    pub max_off_diagonal: f64,
    /// Square root of the mean of `second_moments`.
    pub l_k: f64,
    pub samples: usize,
}

/// Estimates the barycenter, coordinate second moments and isotropic
/// constant from `samples` uniform points.
pub fn isotropy_report(body: &BodySpec, samples: usize, seed: u64) -> Result<IsotropyReport> {
    if samples < 2 {
        return Err(Error::domain("isotropy diagnostics need at least 2 samples"));
    }
    let n = body.n();
    let partial = map_point_blocks(body, samples, seed, |b| {
        let mut s = vec![0.0; 3 * n];
        for x in b.chunks_exact(n) {
            for j in 0..n {
                s[j] += x[j];
                s[n + j] += x[j] * x[j];
                s[2 * n + j] += x[j] * x[(j + 1) % n];
            }
        }
        s
    });
    let mut total = vec![0.0; 3 * n];
    for s in &partial {
        for (t, v) in total.iter_mut().zip(s) {
            *t += v;
        }
    }
    let m = samples as f64;
    let center: Vec<f64> = total[..n].iter().map(|v| v / m).collect();
    let second_moments: Vec<f64> = total[n..2 * n].iter().map(|v| v / m).collect();
    let max_off_diagonal = if n > 1 { total[2 * n..].iter().map(|v| (v / m).abs()).fold(0.0, f64::max) } else { 0.0 };
    let l_k = (second_moments.iter().sum::<f64>() / n as f64).sqrt();
    Ok(IsotropyReport { center, second_moments, max_off_diagonal, l_k, samples })
}

/// Kolmogorov–Smirnov distance between the empirical law of `sorted` and `cdf`.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let m = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / m).max((i + 1) as f64 / m - f)
    })
}
