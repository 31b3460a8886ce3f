use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::quadrature::GaussLegendre;
use crate::{Result, RtoError};

/// `Cov(x1, x2) = sigma² exp(-|x1 - x2| / L)` on the segment `[-a, a]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialKernel {
    pub sigma: f64,
    pub corr_len: f64,
    pub half_width: f64,
}

impl ExponentialKernel {
    pub fn new(sigma: f64, corr_len: f64, half_width: f64) -> Result<Self> {
        if !(corr_len > 0.0) || !(half_width > 0.0) || !(sigma >= 0.0) {
            return Err(RtoError::InvalidInput(format!(
                "kernel requires L > 0, a > 0, sigma >= 0 (got L={corr_len}, a={half_width}, sigma={sigma})"
            )));
        }
        Ok(ExponentialKernel {
            sigma,
            corr_len,
            half_width,
        })
    }

    pub fn covariance(&self, x1: f64, x2: f64) -> f64 {
        self.sigma * self.sigma * (-(x1 - x2).abs() / self.corr_len).exp()
    }

    /// `∫ Cov(x, x) dx` over the domain; the sum of all eigenvalues.
    pub fn trace(&self) -> f64 {
        2.0 * self.half_width * self.sigma * self.sigma
    }
}

/// Which transcendental family an eigenpair comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    /// Even eigenfunction, `tan(ϖa) = 1 / (ϖL)`.
    Cosine,
    /// Odd eigenfunction, `tan(ϖa) = -ϖL`.
    Sine,
}

/// Root of one transcendental family on one branch of `tan(ϖa)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    pub omega: f64,
    pub parity: Parity,
}

const ROOT_RTOL: f64 = 1e-12;

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= ROOT_RTOL * mid.abs() {
            return mid;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root `k` (zero based) of the cosine family, inside `(kπ/a, (k+½)π/a)`.
pub fn cosine_root(a: f64, corr_len: f64, k: usize) -> f64 {
    let lo = k as f64 * PI / a;
    let hi = (k as f64 + 0.5) * PI / a;
    // sin(ϖa)·ϖL - cos(ϖa) has the roots of tan(ϖa) = 1/(ϖL) without the poles
    bisect(lo, hi, |w| (w * a).sin() * w * corr_len - (w * a).cos())
}

/// Root `k` (zero based) of the sine family, inside `((k+½)π/a, (k+1)π/a)`.
pub fn sine_root(a: f64, corr_len: f64, k: usize) -> f64 {
    let lo = (k as f64 + 0.5) * PI / a;
    let hi = (k as f64 + 1.0) * PI / a;
    bisect(lo, hi, |w| (w * a).sin() + w * corr_len * (w * a).cos())
}

/// The `m` smallest positive frequencies of both families, ascending.
///
/// The families interlace (cosine root `k` < sine root `k` < cosine root
/// `k + 1`), so the merge alternates.
pub fn kl_frequencies(a: f64, corr_len: f64, m: usize) -> Vec<Frequency> {
    (0..m)
        .map(|n| {
            let k = n / 2;
            if n % 2 == 0 {
                Frequency {
                    omega: cosine_root(a, corr_len, k),
                    parity: Parity::Cosine,
                }
            } else {
                Frequency {
                    omega: sine_root(a, corr_len, k),
                    parity: Parity::Sine,
                }
            }
        })
        .collect()
}

/// `2 sigma² L / (1 + ϖ² L²)`.
pub fn eigenvalue(sigma: f64, corr_len: f64, omega: f64) -> f64 {
    2.0 * sigma * sigma * corr_len / (1.0 + omega * omega * corr_len * corr_len)
}

/// Truncated K-L basis of an [`ExponentialKernel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KLBasis {
    pub kernel: ExponentialKernel,
    /// Frequencies ascending; equivalently eigenvalues descending.
    pub freqs: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub parity: Vec<Parity>,
    /// Captured fraction of the kernel trace.
    pub energy_fraction: f64,
}

/// First `m` eigenpairs of the kernel, sorted by descending eigenvalue.
pub fn kl_basis(kernel: ExponentialKernel, m: usize) -> Result<KLBasis> {
    if m == 0 {
        return Err(RtoError::InvalidInput("K-L order must be at least 1".into()));
    }
    let freqs = kl_frequencies(kernel.half_width, kernel.corr_len, m);
    let lambdas: Vec<f64> = freqs
        .iter()
        .map(|f| eigenvalue(kernel.sigma, kernel.corr_len, f.omega))
        .collect();
    let trace = kernel.trace();
    let energy_fraction = if trace > 0.0 {
        lambdas.iter().sum::<f64>() / trace
    } else {
        1.0
    };
    Ok(KLBasis {
        kernel,
        freqs: freqs.iter().map(|f| f.omega).collect(),
        parity: freqs.iter().map(|f| f.parity).collect(),
        lambdas,
        energy_fraction,
    })
}

/// Result of a significance check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub order: usize,
    pub energy_fraction: f64,
    /// False when the whole list did not reach the threshold.
    pub reached: bool,
}

/// Smallest `M` with `Σ_{i≤M} λ_i / total ≥ s0`.
///
/// `total` is the analytic trace `2aσ²` for the default check; passing the
/// sum of a finite list reproduces a finite-`N` significance ratio.
pub fn significance_order(lambdas_full: &[f64], total: f64, s0: f64) -> Result<Truncation> {
    if !(s0 > 0.0 && s0 <= 1.0) {
        return Err(RtoError::InvalidInput(format!(
            "significance threshold must lie in (0, 1], got {s0}"
        )));
    }
    if lambdas_full.is_empty() {
        return Err(RtoError::InvalidInput("empty eigenvalue list".into()));
    }
    if total <= 0.0 {
        return Ok(Truncation {
            order: 1,
            energy_fraction: 1.0,
            reached: true,
        });
    }
    let mut acc = 0.0;
    for (i, lam) in lambdas_full.iter().enumerate() {
        acc += lam;
        if acc / total >= s0 {
            return Ok(Truncation {
                order: i + 1,
                energy_fraction: acc / total,
                reached: true,
            });
        }
    }
    log::warn!(
        "significance threshold {s0} not reached with {} eigenvalues (fraction {:.6})",
        lambdas_full.len(),
        acc / total
    );
    Ok(Truncation {
        order: lambdas_full.len(),
        energy_fraction: acc / total,
        reached: false,
    })
}

impl KLBasis {
    /// Basis truncated by the significance check against the analytic trace.
    pub fn with_significance(kernel: ExponentialKernel, s0: f64, max_order: usize) -> Result<Self> {
        let probe = kl_basis(ExponentialKernel { sigma: 1.0, ..kernel }, max_order)?;
        let trunc = significance_order(&probe.lambdas, probe.kernel.trace(), s0)?;
        kl_basis(kernel, trunc.order)
    }

    pub fn order(&self) -> usize {
        self.lambdas.len()
    }

    pub fn half_width(&self) -> f64 {
        self.kernel.half_width
    }

    /// Same eigenfunctions for a kernel with standard deviation `sigma`.
    pub fn scaled(&self, sigma: f64) -> KLBasis {
        let s0 = self.kernel.sigma;
        let lambdas = if s0 > 0.0 {
            let r = (sigma / s0).powi(2);
            self.lambdas.iter().map(|l| l * r).collect()
        } else {
            self.freqs
                .iter()
                .map(|&w| eigenvalue(sigma, self.kernel.corr_len, w))
                .collect()
        };
        KLBasis {
            kernel: ExponentialKernel { sigma, ..self.kernel },
            lambdas,
            ..self.clone()
        }
    }

    /// Normalized eigenfunction `ψ_i(x)`.
    pub fn eval_eigenfunction(&self, i: usize, x: f64) -> f64 {
        let w = self.freqs[i];
        let a = self.kernel.half_width;
        match self.parity[i] {
            Parity::Cosine => (w * x).cos() / (a + (2.0 * w * a).sin() / (2.0 * w)).sqrt(),
            Parity::Sine => (w * x).sin() / (a - (2.0 * w * a).sin() / (2.0 * w)).sqrt(),
        }
    }

    /// Truncated Mercer sum `Σ λ_i ψ_i(x1) ψ_i(x2)`.
    pub fn covariance(&self, x1: f64, x2: f64) -> f64 {
        (0..self.order())
            .map(|i| self.lambdas[i] * self.eval_eigenfunction(i, x1) * self.eval_eigenfunction(i, x2))
            .sum()
    }

    /// `∫ ψ_i ψ_j dx` for all pairs, by composite 8-point Gauss-Legendre on
    /// `panels` equal sub-intervals.
    pub fn gram_matrix(&self, panels: usize) -> Vec<Vec<f64>> {
        let m = self.order();
        let a = self.kernel.half_width;
        let rule = GaussLegendre::new(8);
        let mut gram = vec![vec![0.0; m]; m];
        let width = 2.0 * a / panels as f64;
        for p in 0..panels {
            let lo = -a + p as f64 * width;
            for (x, w) in rule.mapped(lo, lo + width) {
                let vals: Vec<f64> = (0..m).map(|i| self.eval_eigenfunction(i, x)).collect();
                for i in 0..m {
                    for j in 0..=i {
                        gram[i][j] += w * vals[i] * vals[j];
                    }
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                gram[j][i] = gram[i][j];
            }
        }
        gram
    }

    /// `∫ ψ_i dx` over the whole domain, closed form.
    pub fn eigenfunction_integral(&self, i: usize) -> f64 {
        let w = self.freqs[i];
        let a = self.kernel.half_width;
        match self.parity[i] {
            Parity::Cosine => 2.0 * (w * a).sin() / w / (a + (2.0 * w * a).sin() / (2.0 * w)).sqrt(),
            Parity::Sine => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_roots_unit_domain() {
        // independent bracketing: bisection on (0, π/2) and (π/2, π)
        let c = cosine_root(1.0, 1.0, 0);
        let s = sine_root(1.0, 1.0, 0);
        assert!((c - 0.8603).abs() < 1e-4, "{c}");
        assert!((s - 2.0288).abs() < 1e-4, "{s}");
        assert!((c.tan() - 1.0 / c).abs() < 1e-9);
        assert!((s.tan() + s).abs() < 1e-9);
    }

    #[test]
    fn frequencies_interlace_between_poles() {
        let (a, l) = (3.0, 0.7);
        let f = kl_frequencies(a, l, 40);
        for (n, fr) in f.iter().enumerate() {
            let lo = n as f64 * PI / (2.0 * a);
            let hi = (n as f64 + 1.0) * PI / (2.0 * a);
            assert!(fr.omega > lo && fr.omega < hi, "root {n} = {} outside ({lo}, {hi})", fr.omega);
        }
        assert!(f.windows(2).all(|w| w[0].omega < w[1].omega));
    }

    #[test]
    fn first_cosine_eigenvalue() {
        let b = kl_basis(ExponentialKernel::new(1.0, 1.0, 1.0).unwrap(), 3).unwrap();
        assert!((b.lambdas[0] - 1.1494).abs() < 1e-4, "{}", b.lambdas[0]);
        assert_eq!(b.parity[0], Parity::Cosine);
        assert!(b.lambdas.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn zero_sigma_gives_zero_spectrum() {
        let b = kl_basis(ExponentialKernel::new(0.0, 2.0, 5.0).unwrap(), 6).unwrap();
        assert!(b.lambdas.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn truncated_sum_below_trace() {
        let k = ExponentialKernel::new(1.3, 2.0, 5.0).unwrap();
        let b = kl_basis(k, 200).unwrap();
        let s: f64 = b.lambdas.iter().sum();
        assert!(s < k.trace());
        assert!(s / k.trace() > 0.98);
    }

    #[test]
    fn significance_arithmetic() {
        let t = significance_order(&[4.0, 3.0, 2.0, 1.0], 10.0, 0.69).unwrap();
        assert_eq!(t.order, 2);
        assert!((t.energy_fraction - 0.7).abs() < 1e-15);
        assert_eq!(significance_order(&[4.0, 3.0, 2.0, 1.0], 10.0, 1e-12).unwrap().order, 1);
        let miss = significance_order(&[4.0, 3.0], 10.0, 0.9).unwrap();
        assert_eq!(miss.order, 2);
        assert!(!miss.reached);
    }

    #[test]
    fn significance_on_benchmark_edge() {
        // a = 100, L = 10, s0 = 0.9. Against the analytic trace the threshold
        // needs 41 terms (14 terms capture 0.7228 of the energy); computed
        // independently with a bracketed root finder.
        let k = ExponentialKernel::new(1.0, 10.0, 100.0).unwrap();
        let full = kl_basis(k, 400).unwrap();
        let t = significance_order(&full.lambdas, k.trace(), 0.90).unwrap();
        assert_eq!(t.order, 41);
        let at14: f64 = full.lambdas[..14].iter().sum::<f64>() / k.trace();
        assert!((at14 - 0.722_835).abs() < 1e-5, "{at14}");
        // The finite ratio over the first 20 eigenvalues selects 14 terms.
        let first20 = &full.lambdas[..20];
        let t20 = significance_order(first20, first20.iter().sum(), 0.90).unwrap();
        assert_eq!(t20.order, 14);
    }

    #[test]
    fn orthonormal_eigenfunctions() {
        let b = kl_basis(ExponentialKernel::new(1.0, 10.0, 100.0).unwrap(), 30).unwrap();
        let g = b.gram_matrix(400);
        for i in 0..30 {
            for j in 0..30 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g[i][j] - target).abs() < 1e-6, "G[{i}][{j}] = {}", g[i][j]);
            }
        }
    }

    #[test]
    fn eigenfunction_integrals() {
        let b = kl_basis(ExponentialKernel::new(1.0, 2.0, 3.0).unwrap(), 6).unwrap();
        let rule = GaussLegendre::new(8);
        for i in 0..6 {
            let mut q = 0.0;
            for p in 0..60 {
                let lo = -3.0 + p as f64 * 0.1;
                for (x, w) in rule.mapped(lo, lo + 0.1) {
                    q += w * b.eval_eigenfunction(i, x);
                }
            }
            assert!((q - b.eigenfunction_integral(i)).abs() < 1e-10);
        }
    }

    #[test]
    fn scaling_is_quadratic_in_sigma() {
        let b = kl_basis(ExponentialKernel::new(1.0, 2.0, 3.0).unwrap(), 5).unwrap();
        let direct = kl_basis(ExponentialKernel::new(2.5, 2.0, 3.0).unwrap(), 5).unwrap();
        let scaled = b.scaled(2.5);
        for (x, y) in scaled.lambdas.iter().zip(&direct.lambdas) {
            assert!((x - y).abs() < 1e-12 * y);
        }
    }
}
