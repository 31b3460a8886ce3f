use serde::{Deserialize, Serialize};

use crate::{Result, RtoError};

/// Modified SIMP interpolation `E = Emin + (E0 - Emin) ρ^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimpParams {
    pub e0: f64,
    pub emin: f64,
    pub nu: f64,
    pub penal: f64,
}

impl Default for SimpParams {
    fn default() -> Self {
        SimpParams {
            e0: 1000.0,
            emin: 1e-9,
            nu: 0.3,
            penal: 3.0,
        }
    }
}

impl SimpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.emin > 0.0 && self.emin < self.e0) {
            return Err(RtoError::InvalidInput(format!(
                "SIMP moduli need 0 < Emin < E0 (got Emin={}, E0={})",
                self.emin, self.e0
            )));
        }
        if !(self.penal >= 1.0) {
            return Err(RtoError::InvalidInput(format!("penalization must be >= 1, got {}", self.penal)));
        }
        if !(self.nu > -1.0 && self.nu < 0.5) {
            return Err(RtoError::InvalidInput(format!("Poisson ratio {} out of range", self.nu)));
        }
        Ok(())
    }

    pub fn modulus(&self, rho: f64) -> f64 {
        self.emin + (self.e0 - self.emin) * rho.powf(self.penal)
    }

    /// `dE/dρ = p ρ^(p-1) (E0 - Emin)`.
    pub fn modulus_derivative(&self, rho: f64) -> f64 {
        if rho == 0.0 && self.penal > 1.0 {
            return 0.0;
        }
        self.penal * rho.powf(self.penal - 1.0) * (self.e0 - self.emin)
    }
}

pub type ElementMatrix = [[f64; 8]; 8];

/// Plane-stress stiffness of a unit-thickness square bilinear element with
/// `E = 1`, integrated exactly. DOF order: (u, v) at the corners
/// counterclockwise from lower-left. The matrix does not depend on the
/// element's side length.
pub fn element_stiffness(nu: f64) -> ElementMatrix {
    let k = [
        0.5 - nu / 6.0,
        0.125 + nu / 8.0,
        -0.25 - nu / 12.0,
        -0.125 + 3.0 * nu / 8.0,
        -0.25 + nu / 12.0,
        -0.125 - nu / 8.0,
        nu / 6.0,
        0.125 - 3.0 * nu / 8.0,
    ];
    const IDX: [[usize; 8]; 8] = [
        [0, 1, 2, 3, 4, 5, 6, 7],
        [1, 0, 7, 6, 5, 4, 3, 2],
        [2, 7, 0, 5, 6, 3, 4, 1],
        [3, 6, 5, 0, 7, 2, 1, 4],
        [4, 5, 6, 7, 0, 1, 2, 3],
        [5, 4, 3, 2, 1, 0, 7, 6],
        [6, 3, 4, 1, 2, 7, 0, 5],
        [7, 2, 1, 4, 3, 6, 5, 0],
    ];
    let scale = 1.0 / (1.0 - nu * nu);
    let mut ke = [[0.0; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            ke[i][j] = scale * k[IDX[i][j]];
        }
    }
    ke
}

/// `uᵀ K_e v` for element-local vectors.
pub fn element_energy(ke: &ElementMatrix, u: &[f64; 8], v: &[f64; 8]) -> f64 {
    let mut s = 0.0;
    for i in 0..8 {
        let mut row = 0.0;
        for j in 0..8 {
            row += ke[i][j] * v[j];
        }
        s += u[i] * row;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route: 2x2 Gauss quadrature of BᵀDB on the reference square.
    fn quadrature_stiffness(nu: f64, e: f64) -> ElementMatrix {
        let g = 1.0 / 3f64.sqrt();
        let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
        let c = e / (1.0 - nu * nu);
        let d = [[c, c * nu, 0.0], [c * nu, c, 0.0], [0.0, 0.0, c * (1.0 - nu) / 2.0]];
        let mut ke = [[0.0; 8]; 8];
        for &xi in &[-g, g] {
            for &eta in &[-g, g] {
                // unit square: x = (1 + ξ)/2, so d/dx = 2 d/dξ, det J = 1/4
                let mut b = [[0.0; 8]; 3];
                for (a, &(xa, ya)) in corners.iter().enumerate() {
                    let dndx = 2.0 * 0.25 * xa * (1.0 + ya * eta);
                    let dndy = 2.0 * 0.25 * ya * (1.0 + xa * xi);
                    b[0][2 * a] = dndx;
                    b[1][2 * a + 1] = dndy;
                    b[2][2 * a] = dndy;
                    b[2][2 * a + 1] = dndx;
                }
                for i in 0..8 {
                    for j in 0..8 {
                        let mut s = 0.0;
                        for p in 0..3 {
                            for q in 0..3 {
                                s += b[p][i] * d[p][q] * b[q][j];
                            }
                        }
                        ke[i][j] += 0.25 * s;
                    }
                }
            }
        }
        ke
    }

    #[test]
    fn matches_gauss_quadrature() {
        for &nu in &[0.0, 0.3, 0.45] {
            let a = element_stiffness(nu);
            let b = quadrature_stiffness(nu, 1.0);
            for i in 0..8 {
                for j in 0..8 {
                    assert!((a[i][j] - b[i][j]).abs() < 1e-12, "nu {nu} [{i}][{j}]: {} vs {}", a[i][j], b[i][j]);
                }
            }
        }
    }

    #[test]
    fn rigid_body_modes_in_null_space() {
        let ke = element_stiffness(0.3);
        let tx = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let ty = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        // rotation about the center: (u, v) = (-y, x)
        let rot = [0.5, -0.5, 0.5, 0.5, -0.5, 0.5, -0.5, -0.5];
        for mode in [tx, ty, rot] {
            for row in &ke {
                let s: f64 = row.iter().zip(&mode).map(|(k, m)| k * m).sum();
                assert!(s.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn linear_in_modulus() {
        let a = quadrature_stiffness(0.3, 1000.0);
        let b = element_stiffness(0.3);
        for i in 0..8 {
            for j in 0..8 {
                assert!((a[i][j] - 1000.0 * b[i][j]).abs() < 1e-9);
                assert_eq!(b[i][j], b[j][i]);
            }
        }
    }

    #[test]
    fn simp_interpolation() {
        let p = SimpParams::default();
        assert_eq!(p.modulus(1.0), 1000.0);
        assert_eq!(p.modulus(0.0), 1e-9);
        assert_eq!(p.modulus_derivative(0.0), 0.0);
        let h = 1e-6;
        let fd = (p.modulus(0.4 + h) - p.modulus(0.4 - h)) / (2.0 * h);
        assert!((fd - p.modulus_derivative(0.4)).abs() < 1e-6 * fd);
        assert!(SimpParams { emin: 0.0, ..p }.validate().is_err());
    }
}
