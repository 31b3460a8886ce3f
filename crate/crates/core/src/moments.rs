//! Mean, variance and objective of the compliance `c = Σ ξ_i ξ_j c_ij` with
//! independent standard normal `ξ`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fem::ComplianceMatrix;
use crate::random_field::standard_normals;
use crate::{Result, RtoError};

/// Which variance formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceMode {
    /// `2 Σ_{i≠j} c_ij²`, off-diagonal terms only.
    PaperEq26,
    /// `2 Σ_{i,j} c_ij²`, the exact variance of the Gaussian quadratic form.
    #[default]
    IsserlisFull,
}

impl VarianceMode {
    pub fn name(&self) -> &'static str {
        match self {
            VarianceMode::PaperEq26 => "paper-eq26",
            VarianceMode::IsserlisFull => "isserlis-full",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub mode: VarianceMode,
}

impl MomentResult {
    pub fn objective(&self, beta: f64) -> f64 {
        objective(self.mean, self.std_dev, beta)
    }
}

/// Robustness weight `beta` and the weights of the upper and lower objective bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveParams {
    pub beta: f64,
    pub w1: f64,
    pub w2: f64,
}

impl Default for ObjectiveParams {
    fn default() -> Self {
        ObjectiveParams {
            beta: 1.0,
            w1: 1.0,
            w2: 0.0,
        }
    }
}

impl ObjectiveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(RtoError::InvalidInput(format!("beta must be >= 0, got {}", self.beta)));
        }
        validate_weights(self.w1, self.w2)
    }
}

pub(crate) fn validate_weights(w1: f64, w2: f64) -> Result<()> {
    if !(w1 >= 0.0 && w2 >= 0.0) || (w1 + w2 - 1.0).abs() > 1e-9 {
        return Err(RtoError::InvalidInput(format!(
            "bound weights must be non-negative and sum to 1 (got w1={w1}, w2={w2})"
        )));
    }
    Ok(())
}

/// `E[ξ_i ξ_j ξ_k ξ_l]` for independent zero-mean normals with standard
/// deviations `sigmas`.
pub fn fourth_moment(i: usize, j: usize, k: usize, l: usize, sigmas: &[f64]) -> f64 {
    let s2 = |a: usize| sigmas[a] * sigmas[a];
    if i == j && j == k && k == l {
        3.0 * s2(i) * s2(i)
    } else if i == j && k == l {
        s2(i) * s2(k)
    } else if i == k && j == l {
        s2(i) * s2(j)
    } else if i == l && j == k {
        s2(i) * s2(j)
    } else {
        0.0
    }
}

pub fn mean_compliance(c: &ComplianceMatrix) -> f64 {
    c.c.diagonal().sum()
}

pub fn variance_compliance(c: &ComplianceMatrix, mode: VarianceMode) -> f64 {
    let n = c.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if mode == VarianceMode::PaperEq26 && i == j {
                continue;
            }
            s += c.get(i, j) * c.get(i, j);
        }
    }
    2.0 * s
}

pub fn objective(mean: f64, std_dev: f64, beta: f64) -> f64 {
    mean + beta * std_dev
}

pub fn compliance_moments(c: &ComplianceMatrix, mode: VarianceMode) -> MomentResult {
    let variance = variance_compliance(c, mode);
    MomentResult {
        mean: mean_compliance(c),
        variance,
        std_dev: variance.sqrt(),
        mode,
    }
}

/// Monte Carlo samples of the quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub struct McSamples {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub samples: Vec<f64>,
}

const MC_BLOCK: usize = 4096;

/// Draws `n` compliances `ξᵀ C ξ`. Blocks of draws use their own
/// seeds, so the stream does not depend on the thread count.
pub fn mc_compliance_oracle(c: &ComplianceMatrix, n: usize, seed: u64) -> Result<McSamples> {
    if n == 0 {
        return Err(RtoError::InvalidInput("Monte Carlo sample count must be >= 1".into()));
    }
    let dim = c.dim();
    let n_blocks = n.div_ceil(MC_BLOCK);
    let blocks: Vec<Vec<f64>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = MC_BLOCK.min(n - b * MC_BLOCK);
            (0..len)
                .map(|_| {
                    let xi = standard_normals(&mut rng, dim);
                    quadratic_form(c, &xi)
                })
                .collect()
        })
        .collect();
    let samples: Vec<f64> = blocks.concat();
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let variance = if n > 1 {
        samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    Ok(McSamples { mean, variance, samples })
}

pub fn quadratic_form(c: &ComplianceMatrix, xi: &[f64]) -> f64 {
    let n = c.dim();
    let mut s = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += c.get(i, j) * xi[j];
        }
        s += xi[i] * row;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn random_sym(n: usize, seed: u64) -> ComplianceMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = standard_normals(&mut rng, n * n);
        let m = DMatrix::from_fn(n, n, |i, j| a[i * n + j]);
        ComplianceMatrix::new((&m + m.transpose()) * 0.5)
    }

    #[test]
    fn fourth_moment_table() {
        let one = [1.0; 5];
        assert_eq!(fourth_moment(0, 0, 0, 0, &one), 3.0);
        assert_eq!(fourth_moment(1, 2, 1, 2, &one), 1.0);
        assert_eq!(fourth_moment(1, 1, 2, 2, &one), 1.0);
        assert_eq!(fourth_moment(1, 2, 2, 1, &one), 1.0);
        assert_eq!(fourth_moment(1, 2, 3, 4, &one), 0.0);
        assert_eq!(fourth_moment(1, 1, 1, 2, &one), 0.0);
        let s = [2.0, 3.0];
        assert_eq!(fourth_moment(0, 0, 0, 0, &s), 48.0);
        assert_eq!(fourth_moment(0, 1, 0, 1, &s), 36.0);
    }

    #[test]
    fn mean_is_trace() {
        let c = ComplianceMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]);
        assert_eq!(mean_compliance(&c), 6.0);
        let z = ComplianceMatrix::from_rows(&[vec![0.0, 5.0], vec![5.0, 0.0]]);
        assert_eq!(mean_compliance(&z), 0.0);
    }

    #[test]
    fn variance_modes() {
        let off = ComplianceMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(variance_compliance(&off, VarianceMode::PaperEq26), 4.0);
        assert_eq!(variance_compliance(&off, VarianceMode::IsserlisFull), 4.0);
        let id = ComplianceMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(variance_compliance(&id, VarianceMode::PaperEq26), 0.0);
        assert_eq!(variance_compliance(&id, VarianceMode::IsserlisFull), 4.0);
    }

    #[test]
    fn variance_scales_quadratically() {
        let c = random_sym(5, 3);
        let scaled = ComplianceMatrix::new(&c.c * 3.0);
        for mode in [VarianceMode::PaperEq26, VarianceMode::IsserlisFull] {
            let v = variance_compliance(&c, mode);
            assert!((variance_compliance(&scaled, mode) - 9.0 * v).abs() < 1e-12 * v.max(1.0));
        }
    }

    #[test]
    fn objective_values() {
        assert!((objective(90.624, 9.042, 1.0) - 99.666).abs() < 1e-12);
        assert!((objective(25.710, 4.118, 1.0) - 29.828).abs() < 1e-12);
        assert_eq!(objective(3.0, 7.0, 0.0), 3.0);
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(validate_weights(0.7, 0.3).is_ok());
        assert!(validate_weights(0.7, 0.5).is_err());
        assert!(validate_weights(1.2, -0.2).is_err());
    }

    #[test]
    fn oracle_zero_matrix() {
        let c = ComplianceMatrix::new(DMatrix::zeros(3, 3));
        let mc = mc_compliance_oracle(&c, 100, 1).unwrap();
        assert!(mc.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn oracle_is_deterministic() {
        let c = random_sym(4, 9);
        let a = mc_compliance_oracle(&c, 10_000, 5).unwrap();
        let b = mc_compliance_oracle(&c, 10_000, 5).unwrap();
        assert_eq!(a.samples, b.samples);
        let d = mc_compliance_oracle(&c, 10_000, 6).unwrap();
        assert_ne!(a.samples, d.samples);
    }

    #[test]
    fn oracle_matches_closed_form() {
        let c = random_sym(5, 11);
        let n = 200_000;
        let mc = mc_compliance_oracle(&c, n, 2).unwrap();
        let m = compliance_moments(&c, VarianceMode::IsserlisFull);
        let se_mean = (m.variance / n as f64).sqrt();
        assert!((mc.mean - m.mean).abs() < 4.0 * se_mean, "{} vs {}", mc.mean, m.mean);
        assert!((mc.variance - m.variance).abs() / m.variance < 0.03, "{} vs {}", mc.variance, m.variance);
    }
}
