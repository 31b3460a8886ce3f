//! Element sensitivities of the robust objective `μ + βσ` of compliance.
//!
//! The objective equals `Σ w_ij c_ij` with a weight matrix `W`. Its
//! derivative needs every pair `u_ieᵀ k_e u_je`; diagonalizing `W = T Λ Tᵀ`
//! collapses the double sum into one sum over the transformed
//! displacements `u T`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::bounds::scale_factors;
use crate::fem::{element_energy, element_stiffness, ComplianceMatrix, Mesh, SimpParams};
use crate::moments::{compliance_moments, validate_weights, VarianceMode};
use crate::{Result, RtoError};

/// Symmetric weights with `Σ w_ij c_ij = μ + βσ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub w: DMatrix<f64>,
}

/// `W = T diag(eigvals) Tᵀ`, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct OstDecomposition {
    pub t: DMatrix<f64>,
    pub eigvals: Vec<f64>,
}

/// `dJ/dρ̃_e` per element.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityField {
    pub values: Vec<f64>,
}

impl SensitivityField {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `w_ij = δ_ij + 2β c_ij / σ` (diagonal correction dropped in
/// [`VarianceMode::PaperEq26`]).
pub fn weight_matrix(c: &ComplianceMatrix, beta: f64, std_dev: f64, mode: VarianceMode) -> Result<WeightMatrix> {
    let n = c.dim();
    if beta == 0.0 {
        return Ok(WeightMatrix { w: DMatrix::identity(n, n) });
    }
    if !(std_dev > 0.0) {
        return Err(RtoError::DegenerateVariance(format!(
            "beta = {beta} needs a positive compliance standard deviation, got {std_dev}"
        )));
    }
    let k = 2.0 * beta / std_dev;
    let w = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            match mode {
                VarianceMode::IsserlisFull => 1.0 + k * c.get(i, i),
                VarianceMode::PaperEq26 => 1.0,
            }
        } else {
            k * c.get(i, j)
        }
    });
    Ok(WeightMatrix { w })
}

/// Symmetric eigendecomposition. Each eigenvector's largest-magnitude
/// component is made positive.
pub fn ost_decompose(w: &WeightMatrix) -> Result<OstDecomposition> {
    let n = w.w.nrows();
    let asym = (&w.w - w.w.transpose()).amax();
    if asym > 1e-12 * w.w.amax().max(1.0) {
        return Err(RtoError::InvalidInput(format!("weight matrix is not symmetric (max |W - Wᵀ| = {asym})")));
    }
    let eig = SymmetricEigen::try_new(w.w.clone(), 1e-15, 10_000)
        .ok_or_else(|| RtoError::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut t = DMatrix::zeros(n, n);
    let mut eigvals = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        t.set_column(col, &(v * sign));
        eigvals.push(eig.eigenvalues[k]);
    }
    Ok(OstDecomposition { t, eigvals })
}

fn check_dims(disps: &[Vec<f64>], n: usize, rho_phys: &[f64], mesh: &Mesh) -> Result<()> {
    if disps.len() != n {
        return Err(RtoError::InvalidInput(format!("{} displacement fields for a {n}x{n} weight matrix", disps.len())));
    }
    if rho_phys.len() != mesh.n_elems() {
        return Err(RtoError::InvalidInput(format!(
            "density field has {} entries, mesh has {} elements",
            rho_phys.len(),
            mesh.n_elems()
        )));
    }
    if disps.iter().any(|u| u.len() != mesh.n_dofs()) {
        return Err(RtoError::InvalidInput("displacement length does not match the mesh".into()));
    }
    Ok(())
}

fn gather(u: &[f64], dofs: &[usize; 8]) -> [f64; 8] {
    dofs.map(|d| u[d])
}

/// `dJ/dρ_e = -E'(ρ_e) Σ_k λ_k ũ_keᵀ k_e ũ_ke` with `ũ = u T`.
pub fn sensitivity_field(
    disps: &[Vec<f64>],
    ost: &OstDecomposition,
    rho_phys: &[f64],
    params: &SimpParams,
    mesh: &Mesh,
) -> Result<SensitivityField> {
    let n = ost.eigvals.len();
    check_dims(disps, n, rho_phys, mesh)?;
    let ndof = mesh.n_dofs();
    let transformed: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut v = vec![0.0; ndof];
            for (j, u) in disps.iter().enumerate() {
                let t = ost.t[(j, k)];
                if t != 0.0 {
                    for (a, b) in v.iter_mut().zip(u) {
                        *a += t * b;
                    }
                }
            }
            v
        })
        .collect();
    let ke = element_stiffness(params.nu);
    let values = (0..mesh.n_elems())
        .into_par_iter()
        .map(|e| {
            let dofs = mesh.elem_dofs(e);
            let s: f64 = transformed
                .iter()
                .zip(&ost.eigvals)
                .map(|(u, lam)| {
                    let ue = gather(u, &dofs);
                    lam * element_energy(&ke, &ue, &ue)
                })
                .sum();
            -params.modulus_derivative(rho_phys[e]) * s
        })
        .collect();
    Ok(SensitivityField { values })
}

/// The same derivative summed over all pairs `w_ij u_ieᵀ k_e u_je`.
pub fn sensitivity_direct(
    disps: &[Vec<f64>],
    w: &WeightMatrix,
    rho_phys: &[f64],
    params: &SimpParams,
    mesh: &Mesh,
) -> Result<SensitivityField> {
    let n = w.w.nrows();
    check_dims(disps, n, rho_phys, mesh)?;
    let ke = element_stiffness(params.nu);
    let values = (0..mesh.n_elems())
        .into_par_iter()
        .map(|e| {
            let dofs = mesh.elem_dofs(e);
            let ue: Vec<[f64; 8]> = disps.iter().map(|u| gather(u, &dofs)).collect();
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += w.w[(i, j)] * element_energy(&ke, &ue[i], &ue[j]);
                }
            }
            -params.modulus_derivative(rho_phys[e]) * s
        })
        .collect();
    Ok(SensitivityField { values })
}

/// Sensitivity of `μ + βσ` at the p-box point `corner`, from displacements
/// and compliances computed at the reference parameters.
#[allow(clippy::too_many_arguments)]
pub fn corner_sensitivity(
    disps_ref: &[Vec<f64>],
    c_ref: &ComplianceMatrix,
    reference: (f64, f64),
    corner: (f64, f64),
    beta: f64,
    mode: VarianceMode,
    rho_phys: &[f64],
    params: &SimpParams,
    mesh: &Mesh,
) -> Result<SensitivityField> {
    let (mu_ref, sigma_ref) = reference;
    if mu_ref == 0.0 || sigma_ref == 0.0 {
        return Err(RtoError::InvalidInput("reference parameters must be non-zero".into()));
    }
    let n = c_ref.dim();
    let s = scale_factors(n, corner.0 / mu_ref, corner.1 / sigma_ref);
    let c = ComplianceMatrix::new(DMatrix::from_fn(n, n, |i, j| s[i] * s[j] * c_ref.get(i, j)));
    let m = compliance_moments(&c, mode);
    let w = weight_matrix(&c, beta, m.std_dev, mode)?;
    let ost = ost_decompose(&w)?;
    let disps: Vec<Vec<f64>> = disps_ref
        .iter()
        .zip(&s)
        .map(|(u, si)| u.iter().map(|x| si * x).collect())
        .collect();
    sensitivity_field(&disps, &ost, rho_phys, params, mesh)
}

/// `w1 · upper + w2 · lower`.
pub fn interval_sensitivity(
    upper: &SensitivityField,
    lower: &SensitivityField,
    w1: f64,
    w2: f64,
) -> Result<SensitivityField> {
    validate_weights(w1, w2)?;
    if upper.len() != lower.len() {
        return Err(RtoError::InvalidInput("sensitivity fields differ in length".into()));
    }
    Ok(SensitivityField {
        values: upper
            .values
            .iter()
            .zip(&lower.values)
            .map(|(a, b)| w1 * a + w2 * b)
            .collect(),
    })
}
