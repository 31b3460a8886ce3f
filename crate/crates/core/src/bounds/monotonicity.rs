use serde::{Deserialize, Serialize};

use super::ScaledMoments;
use crate::fem::ComplianceMatrix;
use crate::moments::VarianceMode;
use crate::random_field::PBox;
use crate::{Result, RtoError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepInput {
    Mu,
    Sigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeSign {
    Positive,
    Negative,
    /// Every slope is zero (e.g. a zero-width sweep).
    Flat,
    Mixed,
}

impl SlopeSign {
    pub fn is_monotone(&self) -> bool {
        *self != SlopeSign::Mixed
    }

    fn classify(slopes: &[f64], scale: f64) -> SlopeSign {
        let tiny = 1e-12 * scale;
        let pos = slopes.iter().filter(|s| **s > tiny).count();
        let neg = slopes.iter().filter(|s| **s < -tiny).count();
        match (pos, neg) {
            (0, 0) => SlopeSign::Flat,
            (_, 0) => SlopeSign::Positive,
            (0, _) => SlopeSign::Negative,
            _ => SlopeSign::Mixed,
        }
    }
}

/// Finite-difference slopes of one output along one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityEntry {
    pub input: SweepInput,
    /// `"mean"` or `"std_dev"`.
    pub output: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    pub sign: SlopeSign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub entries: Vec<MonotonicityEntry>,
}

impl MonotonicityReport {
    pub fn all_monotone(&self) -> bool {
        self.entries.iter().all(|e| e.sign.is_monotone())
    }

    pub fn get(&self, input: SweepInput, output: &str) -> Option<&MonotonicityEntry> {
        self.entries.iter().find(|e| e.input == input && e.output == output)
    }
}

/// Sweeps `μ_f` and `σ_f` in turn across their intervals (the other held at
/// its midpoint) and classifies the successive slopes of the compliance mean
/// and standard deviation.
pub fn monotonicity_report(
    c_ref: &ComplianceMatrix,
    mu_ref: f64,
    sigma_ref: f64,
    pbox: &PBox,
    n_sweep: usize,
    mode: VarianceMode,
) -> Result<MonotonicityReport> {
    pbox.validate()?;
    if n_sweep < 3 {
        return Err(RtoError::InvalidInput(format!("sweep needs at least 3 points, got {n_sweep}")));
    }
    let sm = ScaledMoments::new(c_ref, mu_ref, sigma_ref, 0.0, mode)?;
    let lin = |lo: f64, hi: f64| -> Vec<f64> {
        (0..n_sweep)
            .map(|k| lo + (hi - lo) * k as f64 / (n_sweep - 1) as f64)
            .collect()
    };
    let mut entries = Vec::new();
    for input in [SweepInput::Mu, SweepInput::Sigma] {
        let grid = match input {
            SweepInput::Mu => lin(pbox.mu_lo, pbox.mu_hi),
            SweepInput::Sigma => lin(pbox.sigma_lo, pbox.sigma_hi),
        };
        let evals: Vec<[f64; 3]> = grid
            .iter()
            .map(|&x| match input {
                SweepInput::Mu => sm.triple(x, pbox.sigma_mid()),
                SweepInput::Sigma => sm.triple(pbox.mu_mid(), x),
            })
            .collect();
        for (q, name) in [(0, "mean"), (1, "std_dev")] {
            let values: Vec<f64> = evals.iter().map(|t| t[q]).collect();
            let slopes: Vec<f64> = (1..n_sweep)
                .map(|k| {
                    let dx = grid[k] - grid[k - 1];
                    if dx == 0.0 {
                        0.0
                    } else {
                        (values[k] - values[k - 1]) / dx
                    }
                })
                .collect();
            let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            entries.push(MonotonicityEntry {
                input,
                output: name.to_string(),
                sign: SlopeSign::classify(&slopes, scale),
                grid: grid.clone(),
                values,
                slopes,
            });
        }
    }
    Ok(MonotonicityReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_field::standard_normals;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_psd(n: usize, seed: u64) -> ComplianceMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = standard_normals(&mut rng, n * n);
        let m = DMatrix::from_fn(n, n, |i, j| a[i * n + j]);
        ComplianceMatrix::new(&m * m.transpose())
    }

    #[test]
    fn sigma_sweeps_increase() {
        for seed in 0..10 {
            let c = random_psd(5, seed);
            let pbox = PBox::new([-1.356, -0.644], [1.289, 1.803]).unwrap();
            let r = monotonicity_report(&c, -1.0, 1.5, &pbox, 11, VarianceMode::IsserlisFull).unwrap();
            assert_eq!(r.get(SweepInput::Sigma, "mean").unwrap().sign, SlopeSign::Positive);
            assert_eq!(r.get(SweepInput::Sigma, "std_dev").unwrap().sign, SlopeSign::Positive);
            // growing μ toward zero shrinks |μ|, so both moments fall
            assert_eq!(r.get(SweepInput::Mu, "mean").unwrap().sign, SlopeSign::Negative);
            assert!(r.all_monotone());
        }
    }

    #[test]
    fn straddling_mean_is_mixed() {
        let c = random_psd(4, 3);
        let pbox = PBox::new([-1.0, 1.0], [1.0, 1.5]).unwrap();
        let r = monotonicity_report(&c, 1.0, 1.0, &pbox, 21, VarianceMode::IsserlisFull).unwrap();
        assert_eq!(r.get(SweepInput::Mu, "mean").unwrap().sign, SlopeSign::Mixed);
        assert!(!r.all_monotone());
    }

    #[test]
    fn flat_sweep() {
        let c = random_psd(3, 4);
        let pbox = PBox::new([1.0, 2.0], [0.5, 0.5]).unwrap();
        let r = monotonicity_report(&c, 1.0, 1.0, &pbox, 5, VarianceMode::IsserlisFull).unwrap();
        assert_eq!(r.get(SweepInput::Sigma, "mean").unwrap().sign, SlopeSign::Flat);
        assert!(monotonicity_report(&c, 1.0, 1.0, &pbox, 2, VarianceMode::IsserlisFull).is_err());
    }
}
