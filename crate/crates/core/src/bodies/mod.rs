//! Normalized `ℓ_p^n` balls, their one-dimensional marginals, and samplers.

mod marginal;
mod sampling;

pub use marginal::{coordinate_cdf, coordinate_marginal, marginal_coordinate, marginal_general, MarginalDensity, MarginalShape};
pub use sampling::{
    isotropy_report, map_point_blocks, ks_statistic, project_samples, sample_sphere, sample_uniform, IsotropyReport,
    SampleBatch,
};

pub(crate) use sampling::{sphere_point, PointSampler};

use crate::mathkit::{ball_volume_ratio, log_ball_volume, log_gamma};
use crate::{Error, Result};

/// Tolerance for unit-norm and membership checks.
pub const UNIT_TOL: f64 = 1e-12;

/// `B_p^n`, or `D_p^n = |B_p^n|^{-1/n} B_p^n` when `normalized`.
///
/// `p = f64::INFINITY` is the cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodySpec {
    p: f64,
    n: usize,
    normalized: bool,
}

impl BodySpec {
    pub fn new(p: f64, n: usize, normalized: bool) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::domain(format!("p must lie in [1, inf], got {p}")));
        }
        if n == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        Ok(Self { p, n, normalized })
    }

    /// The volume-one body `D_p^n`.
    pub fn normalized(p: f64, n: usize) -> Result<Self> {
        Self::new(p, n, true)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_cube(&self) -> bool {
        self.p.is_infinite()
    }

    /// Hölder conjugate `q` with `1/p + 1/q = 1`.
    pub fn dual_exponent(&self) -> f64 {
        if self.p.is_infinite() {
            1.0
        } else if self.p == 1.0 {
            f64::INFINITY
        } else {
            self.p / (self.p - 1.0)
        }
    }

    /// The factor `λ` with body `= λ B_p^n`.
    pub fn scale(&self) -> f64 {
        if self.normalized {
            normalization_scale(self)
        } else {
            1.0
        }
    }

    pub fn volume(&self) -> f64 {
        if self.normalized {
            1.0
        } else {
            log_ball_volume(self.p, self.n).map(f64::exp).unwrap_or(f64::NAN)
        }
    }

    /// Largest Euclidean norm of a point of the body.
    pub fn circumradius(&self) -> f64 {
        let n = self.n as f64;
        if self.p <= 2.0 {
            self.scale()
        } else if self.p.is_infinite() {
            self.scale() * n.sqrt()
        } else {
            self.scale() * n.powf(0.5 - 1.0 / self.p)
        }
    }

    /// `Σ |x_i / λ|^p ≤ 1` up to [`UNIT_TOL`].
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.n {
            return false;
        }
        let lambda = self.scale();
        if self.p.is_infinite() {
            return x.iter().all(|v| (v / lambda).abs() <= 1.0 + UNIT_TOL);
        }
        let s: f64 = x.iter().map(|v| (v / lambda).abs().powf(self.p)).sum();
        s <= 1.0 + UNIT_TOL
    }

    /// `E⟨X, e_1⟩²` for `X` uniform in the body; for `D_p^n` this is `L_K²`.
    ///
    /// Uses `|X_1|/λ ~ Beta(1/p, (n−1)/p + 1)^{1/p}`.
    pub fn coordinate_second_moment(&self) -> f64 {
        let lambda = self.scale();
        if self.p.is_infinite() {
            return lambda * lambda / 3.0;
        }
        let (p, n) = (self.p, self.n as f64);
        let g = |x: f64| log_gamma(x).expect("positive argument");
        let ln = g(3.0 / p) + g(1.0 + n / p) - g(1.0 / p) - g(1.0 + (n + 2.0) / p);
        lambda * lambda * ln.exp()
    }

    /// Exact isotropic constant of `D_p^n` (the body is isotropic by symmetry).
    pub fn isotropic_constant(&self) -> Result<f64> {
        if !self.normalized {
            return Err(Error::Precondition("the isotropic constant is defined for the volume-one body".into()));
        }
        Ok(self.coordinate_second_moment().sqrt())
    }

    /// `|B_p^{n-1}| / |B_p^n|`, with `|B_p^0| = 1`.
    pub(crate) fn section_ratio(&self) -> f64 {
        if self.n == 1 {
            return 0.5;
        }
        ball_volume_ratio(self.p, self.n).expect("validated body")
    }
}

impl std::fmt::Display for BodySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let letter = if self.normalized { 'D' } else { 'B' };
        if self.p.is_infinite() {
            write!(f, "{letter}_inf^{}", self.n)
        } else {
            write!(f, "{letter}_{}^{}", self.p, self.n)
        }
    }
}

/// `|B_p^n|^{-1/n}`: `D_p^n` is this multiple of `B_p^n`, and it is also the
/// coordinate half-width of `D_p^n`.
pub fn normalization_scale(body: &BodySpec) -> f64 {
    if body.p.is_infinite() {
        return 0.5;
    }
    let ln = log_ball_volume(body.p, body.n).expect("validated body");
    (-ln / body.n as f64).exp()
}

/// A unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    coords: Vec<f64>,
}

impl Direction {
    /// Normalizes `v`; fails on zero or non-finite input.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("direction must be a nonempty finite vector"));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::domain("direction must be nonzero"));
        }
        Ok(Self { coords: v.into_iter().map(|x| x / norm).collect() })
    }

    /// The basis vector `e_j` of `R^n` (zero-based `j`).
    pub fn canonical(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return Err(Error::domain(format!("basis index {j} out of range for dimension {n}")));
        }
        let mut coords = vec![0.0; n];
        coords[j] = 1.0;
        Ok(Self { coords })
    }

    pub(crate) fn from_unit_unchecked(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `Some(j)` when the direction is `±e_j`.
    pub fn canonical_index(&self) -> Option<usize> {
        let mut found = None;
        for (j, &c) in self.coords.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if c.abs() != 1.0 || found.is_some() {
                return None;
            }
            found = Some(j);
        }
        found
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.coords.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// `h_K(θ) = max_{x∈K} ⟨x, θ⟩ = λ ‖θ‖_q`.
pub fn support_function(body: &BodySpec, theta: &Direction) -> Result<f64> {
    if theta.dim() != body.n {
        return Err(Error::domain(format!(
            "direction has dimension {}, body has dimension {}",
            theta.dim(),
            body.n
        )));
    }
    let q = body.dual_exponent();
    let c = theta.coords();
    let norm = if q.is_infinite() {
        c.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    } else if q == 1.0 {
        c.iter().map(|x| x.abs()).sum()
    } else {
        let m = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        m * c.iter().map(|x| (x.abs() / m).powf(q)).sum::<f64>().powf(1.0 / q)
    };
    Ok(body.scale() * norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn scales() {
        assert_eq!(normalization_scale(&BodySpec::normalized(f64::INFINITY, 10).unwrap()), 0.5);
        let s = normalization_scale(&BodySpec::normalized(1.0, 2).unwrap());
        assert!((s - FRAC_1_SQRT_2).abs() < 1e-15);
        let s = normalization_scale(&BodySpec::normalized(2.0, 2).unwrap());
        assert!((s - PI.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn normalized_volume_is_one() {
        for &p in &[1.0, 1.5, 2.0, 3.0, 6.0] {
            for n in [1usize, 2, 10, 50, 200] {
                let b = BodySpec::normalized(p, n).unwrap();
                let lv = log_ball_volume(p, n).unwrap() + n as f64 * normalization_scale(&b).ln();
                assert!(lv.abs() < 1e-12, "p={p} n={n}: {lv}");
            }
        }
    }

    #[test]
    fn invalid_bodies() {
        assert!(BodySpec::new(0.5, 3, true).is_err());
        assert!(BodySpec::new(f64::NAN, 3, true).is_err());
        assert!(BodySpec::new(2.0, 0, true).is_err());
    }

    #[test]
    fn support_function_values() {
        let cube = BodySpec::normalized(f64::INFINITY, 4).unwrap();
        assert_eq!(support_function(&cube, &Direction::canonical(4, 0).unwrap()).unwrap(), 0.5);

        let disk = BodySpec::normalized(2.0, 2).unwrap();
        let theta = Direction::new(vec![0.3, -0.7]).unwrap();
        assert!((support_function(&disk, &theta).unwrap() - PI.powf(-0.5)).abs() < 1e-15);

        let diamond = BodySpec::normalized(1.0, 2).unwrap();
        let diag = Direction::new(vec![1.0, 1.0]).unwrap();
        assert!((support_function(&diamond, &diag).unwrap() - 0.5).abs() < 1e-15);

        assert!(support_function(&disk, &Direction::canonical(3, 0).unwrap()).is_err());
    }

    #[test]
    fn directions() {
        let d = Direction::new(vec![3.0, 4.0]).unwrap();
        assert!((d.coords()[0] - 0.6).abs() < 1e-15);
        assert_eq!(d.canonical_index(), None);
        assert_eq!(Direction::canonical(5, 3).unwrap().canonical_index(), Some(3));
        assert_eq!(Direction::new(vec![0.0, -2.0]).unwrap().canonical_index(), Some(1));
        assert!(Direction::new(vec![0.0, 0.0]).is_err());
        assert!(Direction::canonical(2, 2).is_err());
    }

    #[test]
    fn exact_isotropic_constants() {
        let cube = BodySpec::normalized(f64::INFINITY, 7).unwrap();
        assert!((cube.isotropic_constant().unwrap() - 12f64.sqrt().recip()).abs() < 1e-15);
        let disk = BodySpec::normalized(2.0, 2).unwrap();
        assert!((disk.coordinate_second_moment() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(BodySpec::new(2.0, 2, false).unwrap().isotropic_constant().is_err());
    }

    #[test]
    fn circumradius_and_membership() {
        let cube = BodySpec::normalized(f64::INFINITY, 4).unwrap();
        assert!((cube.circumradius() - 1.0).abs() < 1e-15);
        assert!(cube.contains(&[0.5, -0.5, 0.5, 0.0]));
        assert!(!cube.contains(&[0.6, 0.0, 0.0, 0.0]));
        let b = BodySpec::new(4.0, 16, false).unwrap();
        assert!((b.circumradius() - 2.0).abs() < 1e-14);
        let corner = vec![0.5; 16];
        assert!(b.contains(&corner));
    }
}
