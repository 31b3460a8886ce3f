use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::kl::KLBasis;
use crate::{Result, RtoError};

/// One sample path of the truncated field along the load edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRealization {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub xi: Vec<f64>,
}

/// `value(x) = mu + Σ √λ_i ψ_i(x) ξ_i`.
pub fn realize_field(basis: &KLBasis, mu: f64, xi: &[f64], xs: &[f64]) -> Result<FieldRealization> {
    if xi.len() != basis.order() {
        return Err(RtoError::InvalidInput(format!(
            "expected {} coefficients, got {}",
            basis.order(),
            xi.len()
        )));
    }
    let a = basis.half_width();
    let tol = 1e-12 * a;
    if let Some(x) = xs.iter().find(|x| !(x.abs() <= a + tol)) {
        return Err(RtoError::InvalidInput(format!(
            "coordinate {x} outside the field domain [-{a}, {a}]"
        )));
    }
    let amps: Vec<f64> = basis.lambdas.iter().zip(xi).map(|(l, z)| l.sqrt() * z).collect();
    let values = xs
        .iter()
        .map(|&x| {
            mu + amps
                .iter()
                .enumerate()
                .map(|(i, amp)| amp * basis.eval_eigenfunction(i, x))
                .sum::<f64>()
        })
        .collect();
    Ok(FieldRealization {
        xs: xs.to_vec(),
        values,
        xi: xi.to_vec(),
    })
}

/// `n` independent standard normal draws.
pub fn standard_normals<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}
