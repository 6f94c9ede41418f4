//! Estimators for random polytopes `K_N = conv{±X_1, …, ±X_N}`: the Orlicz
//! inversion estimate of `E h_{K_N}(θ)`, Monte Carlo oracles, mean width,
//! sphere averages, and the scans built on them.

mod bound;
mod scan;
mod sphere;
mod support;
mod width;

pub use bound::general_upper_bound;
pub use scan::{direction_measure_scan, direction_measure_scan_with, scaling_fit, DirectionScan, FitTransform, ScalingFit};
pub use sphere::{solve_tilde_s, sphere_average_m, SphereAverage, SphereAverager};
pub use support::{
    expected_support_mc, expected_support_orlicz, expected_support_orlicz_with, orlicz_for_direction, support_scan,
    OrliczOptions, PolytopeExperiment,
};
pub use width::{mean_width_mc, mean_width_mc_scan, mean_width_orlicz, mean_width_orlicz_scan, MeanWidthEstimate};

use crate::mathkit::neumaier_sum;

/// Two-sided normal quantile for 95% intervals.
const Z95: f64 = 1.959_963_984_540_054;

/// Sample mean, standard deviation and normal-approximation 95% interval
/// of a set of Monte Carlo trial values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSummary {
    pub mean: f64,
    /// Sample standard deviation (divisor `trials − 1`); zero for one trial.
    pub sd: f64,
    pub ci95: (f64, f64),
    pub trials: usize,
}

impl McSummary {
    /// Summarizes `values` in the order given. `None` when empty.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let t = values.len() as f64;
        let mean = neumaier_sum(values.iter().copied()) / t;
        let sd = if values.len() > 1 {
            (neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (t - 1.0)).sqrt()
        } else {
            0.0
        };
        let half = Z95 * sd / t.sqrt();
        Some(Self { mean, sd, ci95: (mean - half, mean + half), trials: values.len() })
    }

    pub fn std_error(&self) -> f64 {
        self.sd / (self.trials as f64).sqrt()
    }
}

/// An Orlicz estimate paired with its Monte Carlo oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    /// Number of random points `N`.
    pub n_points: u64,
    pub orlicz_value: f64,
    /// `None` when Monte Carlo was disabled (zero trials).
    pub mc: Option<McSummary>,
    pub seed: u64,
}

impl EstimateReport {
    pub fn mc_mean(&self) -> Option<f64> {
        self.mc.map(|m| m.mean)
    }

    pub fn mc_ci95(&self) -> Option<(f64, f64)> {
        self.mc.map(|m| m.ci95)
    }

    /// `mc_mean / orlicz_value`.
    pub fn ratio(&self) -> Option<f64> {
        self.mc.map(|m| m.mean / self.orlicz_value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_constant_values() {
        let s = McSummary::from_values(&[2.0; 5]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.sd, 0.0);
        assert_eq!(s.ci95, (2.0, 2.0));
        assert!(McSummary::from_values(&[]).is_none());
    }

    #[test]
    fn summary_interval_contains_mean() {
        let s = McSummary::from_values(&[1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!((s.mean - 3.75).abs() < 1e-15);
        assert!(s.ci95.0 < s.mean && s.mean < s.ci95.1);
        let sd = ((2.75f64.powi(2) + 1.75f64.powi(2) + 0.25f64.powi(2) + 4.25f64.powi(2)) / 3.0).sqrt();
        assert!((s.sd - sd).abs() < 1e-14);
    }

    #[test]
    fn report_ratio() {
        let r = EstimateReport { n_points: 10, orlicz_value: 2.0, mc: McSummary::from_values(&[1.0, 3.0]), seed: 0 };
        assert_eq!(r.ratio(), Some(1.0));
        let r = EstimateReport { mc: None, ..r };
        assert_eq!(r.ratio(), None);
        assert_eq!(r.mc_mean(), None);
    }
}
