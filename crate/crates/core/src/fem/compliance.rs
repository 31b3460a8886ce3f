use nalgebra::DMatrix;

use super::loads::LoadCaseSet;
use super::solver::FactoredStiffness;
use crate::{Result, RtoError};

/// Pairwise compliances `c_ij = f_iᵀ u_j` of the superposition load cases.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplianceMatrix {
    pub c: DMatrix<f64>,
}

impl ComplianceMatrix {
    pub fn new(c: DMatrix<f64>) -> Self {
        ComplianceMatrix { c }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        ComplianceMatrix {
            c: DMatrix::from_fn(n, n, |i, j| rows[i][j]),
        }
    }

    /// Number of load cases, `M + 1`.
    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[(i, j)]
    }
}

/// One displacement vector per load case.
pub fn solve_cases(stiffness: &FactoredStiffness, loads: &LoadCaseSet) -> Result<Vec<Vec<f64>>> {
    stiffness.solve_many(&loads.cases)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Raw `f_iᵀ u_j` before symmetrization.
pub fn raw_compliance(loads: &LoadCaseSet, disps: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = loads.len();
    if disps.len() != n {
        return Err(RtoError::InvalidInput(format!(
            "{} load cases but {} displacement fields",
            n,
            disps.len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| dot(&loads.cases[i], &disps[j])))
}

/// `c_ij = f_iᵀ u_j`, symmetrized as `(C + Cᵀ) / 2`.
pub fn compliance_matrix(loads: &LoadCaseSet, disps: &[Vec<f64>]) -> Result<ComplianceMatrix> {
    let raw = raw_compliance(loads, disps)?;
    let sym = (&raw + raw.transpose()) * 0.5;
    Ok(ComplianceMatrix { c: sym })
}
