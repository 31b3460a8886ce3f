use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::{Result, RtoError};

/// Parameterized p-box of a Gaussian load: interval mean and interval
/// standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PBox {
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    /// Confidence level the intervals were built at; `None` when specified directly.
    #[serde(default)]
    pub ci_level: Option<f64>,
    /// Number of observations behind the intervals; `None` when specified directly.
    #[serde(default)]
    pub n_samples: Option<usize>,
}

impl PBox {
    /// A directly specified p-box.
    pub fn new(mu: [f64; 2], sigma: [f64; 2]) -> Result<Self> {
        let pbox = PBox {
            mu_lo: mu[0],
            mu_hi: mu[1],
            sigma_lo: sigma[0],
            sigma_hi: sigma[1],
            ci_level: None,
            n_samples: None,
        };
        pbox.validate()?;
        Ok(pbox)
    }

    /// Zero-width box at a single `(mu, sigma)` point.
    pub fn point(mu: f64, sigma: f64) -> Result<Self> {
        Self::new([mu, mu], [sigma, sigma])
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.mu_lo, self.mu_hi, self.sigma_lo, self.sigma_hi]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(RtoError::InvalidInput("p-box bounds must be finite".into()));
        }
        if self.mu_lo > self.mu_hi {
            return Err(RtoError::InvalidInput(format!(
                "mean interval reversed: [{}, {}]",
                self.mu_lo, self.mu_hi
            )));
        }
        if self.sigma_lo < 0.0 || self.sigma_lo > self.sigma_hi {
            return Err(RtoError::InvalidInput(format!(
                "standard deviation interval must satisfy 0 <= lo <= hi, got [{}, {}]",
                self.sigma_lo, self.sigma_hi
            )));
        }
        Ok(())
    }

    /// True when the mean interval contains zero in its interior or touches it.
    pub fn mean_straddles_zero(&self) -> bool {
        self.mu_lo <= 0.0 && self.mu_hi >= 0.0
    }

    pub fn mu_mid(&self) -> f64 {
        0.5 * (self.mu_lo + self.mu_hi)
    }

    pub fn sigma_mid(&self) -> f64 {
        0.5 * (self.sigma_lo + self.sigma_hi)
    }

    /// The four `(mu, sigma)` corners, in the order
    /// `(lo, lo), (lo, hi), (hi, lo), (hi, hi)`.
    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.mu_lo, self.sigma_lo),
            (self.mu_lo, self.sigma_hi),
            (self.mu_hi, self.sigma_lo),
            (self.mu_hi, self.sigma_hi),
        ]
    }

    /// Whether `other` lies inside `self` (both intervals).
    pub fn contains(&self, other: &PBox) -> bool {
        self.mu_lo <= other.mu_lo
            && other.mu_hi <= self.mu_hi
            && self.sigma_lo <= other.sigma_lo
            && other.sigma_hi <= self.sigma_hi
    }
}

/// Builds the p-box from raw load observations.
///
/// The mean interval is the normal-theory interval `x̄ ± z·s/√n`, the
/// standard deviation interval is the chi-square interval on `s`.
pub fn pbox_from_samples(samples: &[f64], ci_level: f64) -> Result<PBox> {
    if samples.len() < 3 {
        return Err(RtoError::InvalidInput(format!(
            "at least 3 samples are required, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(RtoError::InvalidInput("samples must be finite".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    pbox_from_moments(mean, var.sqrt(), samples.len(), ci_level)
}

/// Same intervals as [`pbox_from_samples`], from summary statistics.
pub fn pbox_from_moments(mean: f64, std_dev: f64, n: usize, ci_level: f64) -> Result<PBox> {
    if n < 3 {
        return Err(RtoError::InvalidInput(format!(
            "at least 3 samples are required, got {n}"
        )));
    }
    if !(ci_level > 0.0 && ci_level < 1.0) {
        return Err(RtoError::InvalidInput(format!(
            "confidence level must lie in (0, 1), got {ci_level}"
        )));
    }
    if !(std_dev >= 0.0) {
        return Err(RtoError::InvalidInput(format!(
            "sample standard deviation must be non-negative, got {std_dev}"
        )));
    }
    let alpha = 1.0 - ci_level;
    let nf = n as f64;
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let half = z * std_dev / nf.sqrt();

    let (sigma_lo, sigma_hi) = if std_dev == 0.0 {
        log::warn!("zero sample variance; standard deviation interval collapses to [0, 0]");
        (0.0, 0.0)
    } else {
        let dof = nf - 1.0;
        let chi = ChiSquared::new(dof)
            .map_err(|e| RtoError::Numerical(format!("chi-square distribution: {e}")))?;
        let upper_q = chi.inverse_cdf(1.0 - alpha / 2.0);
        let lower_q = chi.inverse_cdf(alpha / 2.0);
        (
            std_dev * (dof / upper_q).sqrt(),
            std_dev * (dof / lower_q).sqrt(),
        )
    };

    Ok(PBox {
        mu_lo: mean - half,
        mu_hi: mean + half,
        sigma_lo,
        sigma_hi,
        ci_level: Some(ci_level),
        n_samples: Some(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal as NormalDist};

    #[test]
    fn constant_samples_collapse() {
        let pbox = pbox_from_samples(&[-1.0; 12], 0.95).unwrap();
        assert_eq!((pbox.mu_lo, pbox.mu_hi), (-1.0, -1.0));
        assert_eq!((pbox.sigma_lo, pbox.sigma_hi), (0.0, 0.0));
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            pbox_from_samples(&[1.0, 2.0], 0.9),
            Err(RtoError::InvalidInput(_))
        ));
    }

    #[test]
    fn seeded_draws_match_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dist = NormalDist::new(-1.0, 1.5).unwrap();
        let xs: Vec<f64> = (0..10_000).map(|_| dist.sample(&mut rng)).collect();
        let pbox = pbox_from_samples(&xs, 0.90).unwrap();
        assert!((pbox.mu_lo - -1.0247).abs() < 0.01, "{pbox:?}");
        assert!((pbox.mu_hi - -0.9753).abs() < 0.01, "{pbox:?}");
        // half-width is z·s/√n with z = 1.6449
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let s = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(((pbox.mu_hi - pbox.mu_lo) / 2.0 - 1.644_853_6 * s / 100.0).abs() < 1e-6);
    }

    #[test]
    fn operating_pbox_from_48_observations() {
        // x̄ = -1, s = 1.5, n = 48 at 90% reproduces μ ∈ [-1.356, -0.644],
        // σ ∈ [1.289, 1.803] to the printed precision of the benchmark.
        let pbox = pbox_from_moments(-1.0, 1.5, 48, 0.90).unwrap();
        assert!((pbox.mu_lo - -1.356).abs() < 5e-4, "{pbox:?}");
        assert!((pbox.mu_hi - -0.644).abs() < 5e-4, "{pbox:?}");
        assert!((pbox.sigma_lo - 1.289).abs() < 5e-3, "{pbox:?}");
        assert!((pbox.sigma_hi - 1.803).abs() < 1e-2, "{pbox:?}");
    }

    #[test]
    fn direct_pbox_is_accepted() {
        let pbox = PBox::new([-1.356, -0.644], [1.289, 1.803]).unwrap();
        assert!(!pbox.mean_straddles_zero());
        assert!(PBox::new([1.0, 0.0], [0.0, 1.0]).is_err());
        assert!(PBox::new([0.0, 1.0], [-1.0, 1.0]).is_err());
    }

    #[test]
    fn straddling() {
        assert!(PBox::new([-1.0, 1.0], [1.0, 1.0]).unwrap().mean_straddles_zero());
        assert!(PBox::new([0.0, 1.0], [1.0, 1.0]).unwrap().mean_straddles_zero());
        assert!(PBox::point(0.0, 1.0).unwrap().mean_straddles_zero());
        assert!(!PBox::point(2.0, 1.0).unwrap().mean_straddles_zero());
    }

    #[test]
    fn intervals_nest_with_confidence() {
        let boxes: Vec<PBox> = [0.90, 0.95, 0.99]
            .iter()
            .map(|&ci| pbox_from_moments(-1.0, 1.5, 48, ci).unwrap())
            .collect();
        for pair in boxes.windows(2) {
            assert!(pair[1].mu_lo < pair[0].mu_lo && pair[0].mu_hi < pair[1].mu_hi);
            assert!(pair[1].sigma_lo < pair[0].sigma_lo && pair[0].sigma_hi < pair[1].sigma_hi);
        }
    }
}
