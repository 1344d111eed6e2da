use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rejections allowed before giving up on a mixture.
pub const MAX_REJECTIONS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub stddev: f64,
}

/// Gaussian mixture truncated to `[lower, upper]` by rejection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedGaussianMixture {
    pub components: Vec<MixtureComponent>,
    pub lower: f64,
    pub upper: f64,
}

impl TruncatedGaussianMixture {
    pub fn new(components: Vec<MixtureComponent>, lower: f64, upper: f64) -> Result<Self> {
        let m = Self {
            components,
            lower,
            upper,
        };
        m.validate()?;
        Ok(m)
    }

    /// One truncated Gaussian.
    pub fn single(mean: f64, stddev: f64, lower: f64, upper: f64) -> Result<Self> {
        Self::new(
            vec![MixtureComponent {
                weight: 1.0,
                mean,
                stddev,
            }],
            lower,
            upper,
        )
    }

    /// Always returns `value`.
    pub fn constant(value: f64) -> Result<Self> {
        Self::single(value, 0.0, value, value)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::Parameter("mixture has no components".into()));
        }
        if !(self.lower > 0.0 && self.lower <= self.upper && self.upper.is_finite()) {
            return Err(Error::Parameter(format!(
                "mixture bounds must satisfy 0 < lower <= upper, got [{}, {}]",
                self.lower, self.upper
            )));
        }
        for c in &self.components {
            if !(c.weight >= 0.0 && c.stddev >= 0.0 && c.mean.is_finite() && c.stddev.is_finite()) {
                return Err(Error::Parameter(format!("invalid mixture component {c:?}")));
            }
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!("mixture weights sum to {total}, expected 1")));
        }
        Ok(())
    }

    /// Picks a component by weight and samples it until the value lands in bounds.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        for _ in 0..MAX_REJECTIONS {
            let c = self.pick(rng);
            let z: f64 = StandardNormal.sample(rng);
            let x = c.mean + c.stddev * z;
            if x >= self.lower && x <= self.upper {
                return Ok(x);
            }
        }
        Err(Error::SamplingStarvation {
            attempts: MAX_REJECTIONS,
            lower: self.lower,
            upper: self.upper,
        })
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> &MixtureComponent {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for c in &self.components {
            acc += c.weight;
            if u < acc {
                return c;
            }
        }
        self.components
            .iter()
            .rev()
            .find(|c| c.weight > 0.0)
            .unwrap_or(&self.components[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn normal_density(x: f64, mean: f64, sd: f64) -> f64 {
        (-(x - mean).powi(2) / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
    }

    // Composite Simpson over the truncated mixture density; returns (mean, variance).
    fn truncated_moments(m: &TruncatedGaussianMixture) -> (f64, f64) {
        let n = 200_000;
        let h = (m.upper - m.lower) / n as f64;
        let mut z = 0.0;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for i in 0..=n {
            let x = m.lower + i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            // every rejection re-picks the component: target is the whole
            // mixture density restricted to the bounds
            let f: f64 = m.components.iter().map(|c| c.weight * normal_density(x, c.mean, c.stddev)).sum();
            z += w * f;
            s1 += w * f * x;
            s2 += w * f * x * x;
        }
        let mean = s1 / z;
        (mean, s2 / z - mean * mean)
    }

    #[test]
    fn degenerate_component_is_constant() {
        let m = TruncatedGaussianMixture::single(5.0, 0.0, 1.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(m.sample(&mut rng).unwrap(), 5.0);
        }
    }

    #[test]
    fn infeasible_bounds_starve() {
        let m = TruncatedGaussianMixture::single(100.0, 1.0, 2.0, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(m.sample(&mut rng), Err(Error::SamplingStarvation { .. })));
    }

    #[test]
    fn invalid_mixtures_rejected() {
        let c = |w| MixtureComponent {
            weight: w,
            mean: 1.0,
            stddev: 1.0,
        };
        assert!(TruncatedGaussianMixture::new(vec![c(0.5), c(0.4)], 0.1, 2.0).is_err());
        assert!(TruncatedGaussianMixture::new(vec![c(1.0)], 0.0, 2.0).is_err());
        assert!(TruncatedGaussianMixture::new(vec![c(1.0)], 3.0, 2.0).is_err());
        assert!(TruncatedGaussianMixture::new(vec![], 1.0, 2.0).is_err());
    }

    #[test]
    fn empirical_mean_matches_integrated_mean() {
        let m = TruncatedGaussianMixture::new(
            vec![
                MixtureComponent {
                    weight: 0.3,
                    mean: 2.0,
                    stddev: 1.0,
                },
                MixtureComponent {
                    weight: 0.7,
                    mean: 6.0,
                    stddev: 2.0,
                },
            ],
            1.0,
            8.0,
        )
        .unwrap();
        let (mean, var) = truncated_moments(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = m.sample(&mut rng).unwrap();
            assert!((1.0..=8.0).contains(&x));
            sum += x;
        }
        let se = (var / n as f64).sqrt();
        let empirical = sum / n as f64;
        assert!((empirical - mean).abs() < 3.0 * se, "{empirical} vs {mean} (se {se})");
    }
}
