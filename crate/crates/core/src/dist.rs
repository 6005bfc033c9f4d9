//! Service-time and arrival distributions.

use rand::Rng;
use thiserror::Error;

use crate::time::MINUTES_PER_DAY;

#[derive(Debug, Error, PartialEq)]
pub enum DistError {
    #[error("triangular parameters must satisfy min <= mode <= max, got ({min}, {mode}, {max})")]
    BadTriangular { min: f64, mode: f64, max: f64 },
    #[error("arrival rate must be positive, got {0}")]
    NonPositiveRate(f64),
}

/// Triangular distribution. Two-parameter forms use the midpoint as mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangular {
    min: f64,
    mode: f64,
    max: f64,
}

impl Triangular {
    pub fn new(min: f64, mode: f64, max: f64) -> Result<Self, DistError> {
        if !(min <= mode && mode <= max) || !min.is_finite() || !max.is_finite() {
            return Err(DistError::BadTriangular { min, mode, max });
        }
        Ok(Triangular { min, mode, max })
    }

    /// `Tri(a, b)` with the mode at the midpoint of the support.
    pub fn symmetric(min: f64, max: f64) -> Result<Self, DistError> {
        Self::new(min, (min + max) / 2.0, max)
    }

    pub fn min(&self) -> f64 {
        self.min
    }
    pub fn mode(&self) -> f64 {
        self.mode
    }
    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn mean(&self) -> f64 {
        (self.min + self.mode + self.max) / 3.0
    }

    /// Inverse-CDF sampling. Degenerate support returns the point mass.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let span = self.max - self.min;
        if span == 0.0 {
            return self.min;
        }
        let u: f64 = rng.gen();
        let fc = (self.mode - self.min) / span;
        if u < fc {
            self.min + (u * span * (self.mode - self.min)).sqrt()
        } else {
            self.max - ((1.0 - u) * span * (self.max - self.mode)).sqrt()
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.min {
            return 0.0;
        }
        if x >= self.max {
            return 1.0;
        }
        let span = self.max - self.min;
        if x < self.mode {
            (x - self.min).powi(2) / (span * (self.mode - self.min))
        } else if x == self.mode {
            (self.mode - self.min) / span
        } else {
            1.0 - (self.max - x).powi(2) / (span * (self.max - self.mode))
        }
    }
}

/// Exponential inter-arrival gap in minutes for a Poisson process with the
/// given daily rate.
pub fn sample_interarrival<R: Rng + ?Sized>(
    rng: &mut R,
    rate_per_day: f64,
) -> Result<f64, DistError> {
    if !(rate_per_day > 0.0) {
        return Err(DistError::NonPositiveRate(rate_per_day));
    }
    let mean_minutes = MINUTES_PER_DAY / rate_per_day;
    let u: f64 = rng.gen();
    Ok(-mean_minutes * (1.0 - u).ln())
}

pub fn exponential_cdf(x: f64, mean: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - (-x / mean).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Purpose, RngStreams};
    use crate::testing::ks_statistic;

    #[test]
    fn degenerate_support_is_point_mass() {
        let tri = Triangular::new(5.0, 5.0, 5.0).unwrap();
        let mut rng = RngStreams::new(1, 0, 0).fresh(Purpose::Duration, 0);
        for _ in 0..100 {
            assert_eq!(tri.sample(&mut rng), 5.0);
        }
    }

    #[test]
    fn parameter_order_violation_rejected() {
        assert!(Triangular::new(3.0, 2.0, 5.0).is_err());
        assert!(Triangular::new(3.0, 6.0, 5.0).is_err());
    }

    #[test]
    fn symmetric_tri_mean_matches_analytic() {
        // Tri(10, 15) with midpoint mode 12.5 has mean (10 + 12.5 + 15)/3 = 12.5.
        let tri = Triangular::symmetric(10.0, 15.0).unwrap();
        assert_eq!(tri.mean(), 12.5);
        let mut rng = RngStreams::new(7, 0, 0).fresh(Purpose::Duration, 0);
        let n = 1_000_000;
        let sum: f64 = (0..n).map(|_| tri.sample(&mut rng)).sum();
        let mc_mean = sum / n as f64;
        assert!(
            (mc_mean - 12.5).abs() < 0.01,
            "monte carlo mean {mc_mean} off analytic 12.5"
        );
    }

    #[test]
    fn empirical_cdf_at_mode_is_half_for_symmetric_tri() {
        let tri = Triangular::new(0.0, 0.5, 1.0).unwrap();
        assert_eq!(tri.cdf(0.5), 0.5);
        let mut rng = RngStreams::new(11, 0, 0).fresh(Purpose::Duration, 1);
        let n = 1_000_000;
        let below = (0..n).filter(|_| tri.sample(&mut rng) <= 0.5).count();
        let frac = below as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.01, "empirical CDF at mode {frac}");
    }

    #[test]
    fn samples_stay_in_support() {
        let tri = Triangular::new(5.0, 7.0, 10.0).unwrap();
        let mut rng = RngStreams::new(3, 0, 0).fresh(Purpose::Duration, 2);
        for _ in 0..10_000 {
            let x = tri.sample(&mut rng);
            assert!((5.0..=10.0).contains(&x));
        }
    }

    #[test]
    fn triangular_passes_ks_against_analytic_cdf() {
        // Two-sided KS at alpha = 0.01: critical D = 1.62762 / sqrt(n).
        let tri = Triangular::new(2.0, 5.0, 11.0).unwrap();
        let mut rng = RngStreams::new(13, 0, 0).fresh(Purpose::Duration, 3);
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|_| tri.sample(&mut rng)).collect();
        let d = ks_statistic(&samples, |x| tri.cdf(x));
        let crit = 1.62762 / (n as f64).sqrt();
        assert!(d < crit, "KS D={d} exceeds critical {crit}");
    }

    #[test]
    fn interarrival_mean_for_ten_per_day() {
        let mut rng = RngStreams::new(5, 0, 0).fresh(Purpose::Arrival, 0);
        let n = 1_000_000;
        let sum: f64 = (0..n)
            .map(|_| sample_interarrival(&mut rng, 10.0).unwrap())
            .sum();
        let mean = sum / n as f64;
        assert!((mean - 144.0).abs() < 1.0, "mean gap {mean} vs 144");
    }

    #[test]
    fn interarrival_unit_scaling() {
        let mut rng = RngStreams::new(5, 0, 0).fresh(Purpose::Arrival, 1);
        let n = 200_000;
        let sum: f64 = (0..n)
            .map(|_| sample_interarrival(&mut rng, 1440.0).unwrap())
            .sum();
        let mean = sum / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean gap {mean} vs 1");
    }

    #[test]
    fn interarrival_rejects_non_positive_rate() {
        let mut rng = RngStreams::new(5, 0, 0).fresh(Purpose::Arrival, 2);
        assert!(sample_interarrival(&mut rng, 0.0).is_err());
        assert!(sample_interarrival(&mut rng, -3.0).is_err());
    }

    #[test]
    fn same_stream_key_reproduces_gap_sequence() {
        let mut a = RngStreams::new(99, 0, 0).fresh(Purpose::Arrival, 0);
        let mut b = RngStreams::new(99, 0, 0).fresh(Purpose::Arrival, 0);
        for _ in 0..64 {
            assert_eq!(
                sample_interarrival(&mut a, 10.0).unwrap(),
                sample_interarrival(&mut b, 10.0).unwrap()
            );
        }
    }

    #[test]
    fn exponential_passes_ks_against_analytic_cdf() {
        let mut rng = RngStreams::new(21, 0, 0).fresh(Purpose::Arrival, 3);
        let n = 100_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| sample_interarrival(&mut rng, 10.0).unwrap())
            .collect();
        let d = ks_statistic(&samples, |x| exponential_cdf(x, 144.0));
        let crit = 1.62762 / (n as f64).sqrt();
        assert!(d < crit, "KS D={d} exceeds critical {crit}");
    }
}
