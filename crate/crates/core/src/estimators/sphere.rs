use crate::bodies::{map_point_blocks, BodySpec};
use crate::mathkit::neumaier_sum;
use crate::orlicz::m_spherical_sorted;
use crate::rng::{self, tag};
use crate::{Error, Result};

const TILDE_S_REL_TOL: f64 = 1e-6;

/// A Monte Carlo average with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereAverage {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// `∫_{S^{n−1}} M_θ(1/s) dμ(θ) = ∫_K M_{⟨θ,e_1⟩}(‖x‖_2/s) dx` evaluated on
/// one frozen cloud of uniform points, so that it is a deterministic,
/// nonincreasing function of `s`.
#[derive(Debug, Clone)]
pub struct SphereAverager {
    n: usize,
    /// `‖x_i‖_2`, ascending.
    norms: Vec<f64>,
}

impl SphereAverager {
    pub fn new(body: &BodySpec, samples: usize, seed: u64) -> Result<Self> {
        if body.n() < 2 {
            return Err(Error::domain("sphere averages need n >= 2"));
        }
        if samples < 2 {
            return Err(Error::domain("sphere averages need at least 2 samples"));
        }
        let n = body.n();
        let blocks = map_point_blocks(body, samples, rng::derive(seed, tag::SPHERE_AVERAGE), |b| {
            b.chunks_exact(n).map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt()).collect::<Vec<f64>>()
        });
        let mut norms = blocks.concat();
        norms.sort_by(f64::total_cmp);
        Ok(Self { n, norms })
    }

    pub fn samples(&self) -> usize {
        self.norms.len()
    }

    pub fn max_norm(&self) -> f64 {
        *self.norms.last().expect("nonempty cloud")
    }

    /// The average at scale `s`.
    pub fn average(&self, s: f64) -> Result<SphereAverage> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::domain(format!("s must be finite and positive, got {s}")));
        }
        let m = self.norms.len();
        let first = self.norms.partition_point(|&r| r <= s);
        let args: Vec<f64> = self.norms[first..].iter().map(|r| r / s).collect();
        let values = m_spherical_sorted(self.n, &args)?;
        let mean = neumaier_sum(values.iter().copied()) / m as f64;
        let zeros = first as f64 * mean * mean;
        let ss = neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean))) + zeros;
        let var = ss / (m as f64 - 1.0);
        Ok(SphereAverage { value: mean, std_error: (var / m as f64).sqrt(), samples: m })
    }

    /// The `s` at which the average crosses `level`, to relative precision 1e-6.
    pub fn solve(&self, level: f64) -> Result<f64> {
        if !(level > 0.0) || !level.is_finite() {
            return Err(Error::domain(format!("level must be finite and positive, got {level}")));
        }
        let below = |s: f64| -> Result<bool> { Ok(self.average(s)?.value <= level) };
        let mut hi = self.max_norm();
        let mut lo = hi;
        loop {
            lo *= 0.5;
            if lo < hi * 1e-6 {
                return Err(Error::Range(format!("the sphere average stays below {level:e} down to s = {lo:e}")));
            }
            if !below(lo)? {
                break;
            }
            hi = lo;
        }
        while hi / lo - 1.0 > TILDE_S_REL_TOL {
            let mid = 0.5 * (lo + hi);
            if below(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// `∫_K M_{⟨θ,e_1⟩}(‖x‖_2/s) dx` from `samples` uniform points of `body`.
pub fn sphere_average_m(body: &BodySpec, s: f64, samples: usize, seed: u64) -> Result<SphereAverage> {
    SphereAverager::new(body, samples, seed)?.average(s)
}

/// `s̃` with `∫_{S^{n−1}} M_θ(1/s̃) dμ(θ) = 1/N`, by bisection on one frozen
/// cloud of `samples` points.
pub fn solve_tilde_s(body: &BodySpec, n_points: u64, samples: usize, seed: u64) -> Result<f64> {
    if n_points < 2 {
        return Err(Error::domain(format!("N must be at least 2, got {n_points}")));
    }
    SphereAverager::new(body, samples, seed)?.solve(1.0 / n_points as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orlicz::PBallSpec;

    #[test]
    fn vanishes_beyond_circumradius() {
        let body = BodySpec::normalized(1.0, 5).unwrap();
        let a = sphere_average_m(&body, body.circumradius(), 10_000, 1).unwrap();
        assert_eq!(a.value, 0.0);
        assert_eq!(a.std_error, 0.0);
    }

    #[test]
    fn matches_ball_closed_form() {
        let body = BodySpec::normalized(2.0, 6).unwrap();
        let spec = PBallSpec::new(2.0, 6).unwrap();
        let avg = SphereAverager::new(&body, 200_000, 3).unwrap();
        for frac in [0.2, 0.4, 0.6] {
            let s = frac * spec.support_radius();
            let a = avg.average(s).unwrap();
            let exact = spec.first(s).unwrap();
            assert!((a.value - exact).abs() < 4.0 * a.std_error, "s={s}: {} ± {} vs {exact}", a.value, a.std_error);
        }
    }

    #[test]
    fn average_is_nonincreasing() {
        let avg = SphereAverager::new(&BodySpec::normalized(3.0, 4).unwrap(), 20_000, 2).unwrap();
        let vals: Vec<f64> = (1..20).map(|i| avg.average(0.05 * i as f64).unwrap().value).collect();
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn tilde_s_is_monotone_and_bounded() {
        let body = BodySpec::normalized(2.0, 10).unwrap();
        let a = solve_tilde_s(&body, 100, 50_000, 7).unwrap();
        let b = solve_tilde_s(&body, 10_000, 50_000, 7).unwrap();
        assert!(a < b, "{a} {b}");
        assert!(b <= body.circumradius());
        assert!(solve_tilde_s(&body, 1, 1000, 7).is_err());
    }

    #[test]
    fn tilde_s_crosses_the_level() {
        let avg = SphereAverager::new(&BodySpec::normalized(4.0, 6).unwrap(), 30_000, 5).unwrap();
        let s = avg.solve(1e-3).unwrap();
        assert!(avg.average(s).unwrap().value <= 1e-3);
        assert!(avg.average(s * (1.0 - 2e-6)).unwrap().value > 1e-3);
    }
}
