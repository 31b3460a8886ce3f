use nalgebra::{DMatrix, SymmetricEigen};

use super::kl::ExponentialKernel;
use crate::{Result, RtoError};

/// Leading eigenpairs of the kernel's integral operator on a midpoint grid.
///
/// `lambdas` are descending; `eigvecs[k]` holds eigenfunction `k` sampled at
/// the grid midpoints and normalized to unit L2 norm under the grid weight.
#[derive(Debug, Clone)]
pub struct NystromSpectrum {
    pub nodes: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub eigvecs: Vec<Vec<f64>>,
    /// Sum of every eigenvalue of the discretized operator.
    pub full_trace: f64,
}

pub fn nystrom_eigenpairs(kernel: ExponentialKernel, n_quad: usize, m: usize) -> Result<NystromSpectrum> {
    if m == 0 || n_quad < 10 * m {
        return Err(RtoError::InvalidInput(format!(
            "Nyström solve needs n_quad >= 10·M (n_quad = {n_quad}, M = {m})"
        )));
    }
    let a = kernel.half_width;
    let h = 2.0 * a / n_quad as f64;
    let nodes: Vec<f64> = (0..n_quad).map(|i| -a + h * (i as f64 + 0.5)).collect();
    let mat = DMatrix::from_fn(n_quad, n_quad, |i, j| kernel.covariance(nodes[i], nodes[j]) * h);
    let eig = SymmetricEigen::try_new(mat, f64::EPSILON, 0)
        .ok_or_else(|| RtoError::Numerical("symmetric eigen-solver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n_quad).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let full_trace = eig.eigenvalues.iter().sum();
    let scale = 1.0 / h.sqrt();
    let lambdas = order[..m].iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigvecs = order[..m]
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().map(|v| v * scale).collect())
        .collect();
    Ok(NystromSpectrum {
        nodes,
        lambdas,
        eigvecs,
        full_trace,
    })
}
