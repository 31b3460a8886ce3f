use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::element::{element_stiffness, ElementMatrix, SimpParams};
use super::mesh::Mesh;
use crate::{Result, RtoError};

/// Linear solver used for the reduced stiffness system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Banded Cholesky up to 250 x 250 elements, conjugate gradients beyond.
    #[default]
    Auto,
    Direct,
    Cg,
}

/// Largest grid side solved directly under [`SolverKind::Auto`].
pub const DIRECT_LIMIT: usize = 250;
const CG_RTOL: f64 = 1e-11;
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Lower band of a symmetric positive definite matrix, row-major:
/// row `i` stores columns `i - bw ..= i`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedCholesky {
    fn zeros(n: usize, bw: usize) -> Self {
        BandedCholesky {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + self.bw + j - i
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = self.at(i, j);
        self.data[k] += v;
    }

    /// In-place `L Lᵀ` factorization. Fails when a pivot collapses relative
    /// to its original diagonal entry.
    fn factor(&mut self) -> Result<()> {
        let w = self.bw + 1;
        for i in 0..self.n {
            let lo_i = i.saturating_sub(self.bw);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(self.bw));
                let (row_i, row_j) = (i * w + self.bw - i, j * w + self.bw - j);
                let mut s = self.data[row_i + j];
                if lo < j {
                    let a = &self.data[row_i + lo..row_i + j];
                    let b = &self.data[row_j + lo..row_j + j];
                    s -= a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                }
                if i == j {
                    let orig = self.data[row_i + i];
                    if !(s > 1e-12 * orig.abs()) || !s.is_finite() {
                        return Err(RtoError::Structural(format!(
                            "stiffness matrix is singular at reduced equation {i} (pivot {s:e}); \
                             the supports probably leave a rigid-body mode"
                        )));
                    }
                    self.data[row_i + i] = s.sqrt();
                } else {
                    self.data[row_i + j] = s / self.data[row_j + j];
                }
            }
        }
        Ok(())
    }

    fn solve(&self, b: &mut [f64]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let row = i * w + self.bw - i;
            let s: f64 = (lo..i).map(|k| self.data[row + k] * b[k]).sum();
            b[i] = (b[i] - s) / self.data[row + i];
        }
        for i in (0..self.n).rev() {
            let row = i * w + self.bw - i;
            b[i] /= self.data[row + i];
            let bi = b[i];
            let lo = i.saturating_sub(self.bw);
            for k in lo..i {
                b[k] -= self.data[row + k] * bi;
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_triplets(n: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(trip.len() / 4);
        let mut vals: Vec<f64> = Vec::with_capacity(trip.len() / 4);
        let mut last = None;
        for (i, j, v) in trip {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr { row_ptr, cols, vals }
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.cols[r.clone()].iter().zip(&self.vals[r]).map(|(&j, v)| v * x[j]).sum();
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.row_ptr.len() - 1)
            .map(|i| {
                let r = self.row_ptr[i]..self.row_ptr[i + 1];
                self.cols[r.clone()]
                    .iter()
                    .zip(&self.vals[r])
                    .find(|(&j, _)| j == i)
                    .map_or(0.0, |(_, v)| *v)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Banded(BandedCholesky),
    Cg { mat: Csr, inv_diag: Vec<f64> },
}

/// Reduced global stiffness, factored (or preconditioned) for repeated solves.
#[derive(Debug, Clone)]
pub struct FactoredStiffness {
    n_dofs: usize,
    /// Global DOF to reduced equation index; `None` for constrained DOFs.
    reduced: Vec<Option<usize>>,
    n_free: usize,
    backend: Backend,
    moduli: Vec<f64>,
    ke: ElementMatrix,
    mesh: Mesh,
}

/// Orders nodes along the shorter grid side so the bandwidth stays small.
fn reduced_numbering(mesh: &Mesh) -> (Vec<Option<usize>>, usize) {
    let nodes: Vec<usize> = if mesh.ny <= mesh.nx {
        (0..mesh.n_nodes()).collect()
    } else {
        (0..=mesh.ny)
            .flat_map(|j| (0..=mesh.nx).map(move |i| (i, j)))
            .map(|(i, j)| mesh.node(i, j))
            .collect()
    };
    let mut fixed = vec![false; mesh.n_dofs()];
    for &d in &mesh.fixed_dofs {
        fixed[d] = true;
    }
    let mut reduced = vec![None; mesh.n_dofs()];
    let mut k = 0;
    for n in nodes {
        for d in [2 * n, 2 * n + 1] {
            if !fixed[d] {
                reduced[d] = Some(k);
                k += 1;
            }
        }
    }
    (reduced, k)
}

/// Assembles the SIMP stiffness for `rho_phys`, eliminates the supports and
/// factors the reduced system.
pub fn assemble_and_factor(
    mesh: &Mesh,
    rho_phys: &[f64],
    params: &SimpParams,
    kind: SolverKind,
) -> Result<FactoredStiffness> {
    if rho_phys.len() != mesh.n_elems() {
        return Err(RtoError::InvalidInput(format!(
            "density field has {} entries, mesh has {} elements",
            rho_phys.len(),
            mesh.n_elems()
        )));
    }
    if let Some(r) = rho_phys.iter().find(|r| !(**r >= 0.0 && **r <= 1.0)) {
        return Err(RtoError::InvalidInput(format!("density {r} outside [0, 1]")));
    }
    params.validate()?;
    let ke = element_stiffness(params.nu);
    let moduli: Vec<f64> = rho_phys.iter().map(|&r| params.modulus(r)).collect();
    let (reduced, n_free) = reduced_numbering(mesh);
    if n_free == 0 {
        return Err(RtoError::Structural("every degree of freedom is constrained".into()));
    }

    let direct = match kind {
        SolverKind::Direct => true,
        SolverKind::Cg => false,
        SolverKind::Auto => mesh.nx <= DIRECT_LIMIT && mesh.ny <= DIRECT_LIMIT,
    };

    let backend = if direct {
        let mut bw = 0;
        for e in 0..mesh.n_elems() {
            let idx: Vec<usize> = mesh.elem_dofs(e).iter().filter_map(|&d| reduced[d]).collect();
            if let (Some(lo), Some(hi)) = (idx.iter().min(), idx.iter().max()) {
                bw = bw.max(hi - lo);
            }
        }
        let mut band = BandedCholesky::zeros(n_free, bw);
        for e in 0..mesh.n_elems() {
            let dofs = mesh.elem_dofs(e);
            for a in 0..8 {
                let Some(i) = reduced[dofs[a]] else { continue };
                for b in 0..8 {
                    let Some(j) = reduced[dofs[b]] else { continue };
                    if j <= i {
                        band.add(i, j, moduli[e] * ke[a][b]);
                    }
                }
            }
        }
        band.factor()?;
        Backend::Banded(band)
    } else {
        let mut trip = Vec::with_capacity(64 * mesh.n_elems());
        for e in 0..mesh.n_elems() {
            let dofs = mesh.elem_dofs(e);
            for a in 0..8 {
                let Some(i) = reduced[dofs[a]] else { continue };
                for b in 0..8 {
                    let Some(j) = reduced[dofs[b]] else { continue };
                    trip.push((i, j, moduli[e] * ke[a][b]));
                }
            }
        }
        let mat = Csr::from_triplets(n_free, trip);
        let diag = mat.diagonal();
        if diag.iter().any(|d| !(*d > 0.0)) {
            return Err(RtoError::Structural("zero diagonal in reduced stiffness".into()));
        }
        Backend::Cg {
            inv_diag: diag.iter().map(|d| 1.0 / d).collect(),
            mat,
        }
    };

    Ok(FactoredStiffness {
        n_dofs: mesh.n_dofs(),
        reduced,
        n_free,
        backend,
        moduli,
        ke,
        mesh: mesh.clone(),
    })
}

impl FactoredStiffness {
    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.backend, Backend::Banded(_))
    }

    /// Element moduli the matrix was assembled with.
    pub fn moduli(&self) -> &[f64] {
        &self.moduli
    }

    /// Displacements for one global load vector; constrained DOFs stay zero.
    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.n_dofs {
            return Err(RtoError::InvalidInput(format!(
                "load vector has {} entries, expected {}",
                f.len(),
                self.n_dofs
            )));
        }
        let mut b = vec![0.0; self.n_free];
        for (d, r) in self.reduced.iter().enumerate() {
            if let Some(r) = r {
                b[*r] = f[d];
            }
        }
        let x = match &self.backend {
            Backend::Banded(chol) => {
                chol.solve(&mut b);
                b
            }
            Backend::Cg { mat, inv_diag } => pcg(mat, inv_diag, &b)?,
        };
        let mut u = vec![0.0; self.n_dofs];
        for (d, r) in self.reduced.iter().enumerate() {
            if let Some(r) = r {
                u[d] = x[*r];
            }
        }
        Ok(u)
    }

    /// `K u` on the full DOF vector, element by element. Rows of constrained
    /// DOFs are returned as zero.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_dofs];
        for e in 0..self.mesh.n_elems() {
            let dofs = self.mesh.elem_dofs(e);
            for a in 0..8 {
                let mut s = 0.0;
                for b in 0..8 {
                    s += self.ke[a][b] * u[dofs[b]];
                }
                y[dofs[a]] += self.moduli[e] * s;
            }
        }
        for &d in &self.mesh.fixed_dofs {
            y[d] = 0.0;
        }
        y
    }

    /// Relative residual `‖K u - f‖ / ‖f‖` over free DOFs.
    pub fn relative_residual(&self, u: &[f64], f: &[f64]) -> f64 {
        let ku = self.apply(u);
        let mut num = 0.0;
        let mut den = 0.0;
        for (d, r) in self.reduced.iter().enumerate() {
            if r.is_some() {
                num += (ku[d] - f[d]).powi(2);
                den += f[d] * f[d];
            }
        }
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    /// Solves every load case, checking each residual.
    pub fn solve_many(&self, loads: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        loads
            .par_iter()
            .enumerate()
            .map(|(i, f)| {
                let u = self.solve(f)?;
                let res = self.relative_residual(&u, f);
                if res > RESIDUAL_TOL {
                    return Err(RtoError::Numerical(format!(
                        "load case {i}: relative residual {res:e} exceeds {RESIDUAL_TOL:e}"
                    )));
                }
                Ok(u)
            })
            .collect()
    }
}

fn pcg(mat: &Csr, inv_diag: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let max_iter = 20 * n + 100;
    for _ in 0..max_iter {
        mat.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(RtoError::Numerical("conjugate gradients lost positive definiteness".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= CG_RTOL * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    Err(RtoError::Numerical(format!(
        "conjugate gradients did not converge in {max_iter} iterations (relative residual {:e})",
        rnorm / bnorm
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::{LoadEdge, SupportPreset};
    use nalgebra::{DMatrix, DVector};

    fn plate(nx: usize, ny: usize) -> Mesh {
        let fixed = Mesh::preset_dofs(nx, ny, SupportPreset::BottomFixed);
        let nodes: Vec<usize> = (0..=nx).map(|i| i * (ny + 1)).collect();
        Mesh::new(nx, ny, 1.0, fixed, LoadEdge { nodes, direction: [0.0, 1.0] }).unwrap()
    }

    /// Dense reduced stiffness assembled independently of the band storage.
    fn dense_reduced(mesh: &Mesh, rho: &[f64], p: &SimpParams) -> (DMatrix<f64>, Vec<usize>) {
        let ke = element_stiffness(p.nu);
        let free: Vec<usize> = (0..mesh.n_dofs()).filter(|d| !mesh.fixed_dofs.contains(d)).collect();
        let mut pos = vec![usize::MAX; mesh.n_dofs()];
        for (k, &d) in free.iter().enumerate() {
            pos[d] = k;
        }
        let mut k = DMatrix::zeros(free.len(), free.len());
        for e in 0..mesh.n_elems() {
            let dofs = mesh.elem_dofs(e);
            let em = p.modulus(rho[e]);
            for a in 0..8 {
                for b in 0..8 {
                    if pos[dofs[a]] != usize::MAX && pos[dofs[b]] != usize::MAX {
                        k[(pos[dofs[a]], pos[dofs[b]])] += em * ke[a][b];
                    }
                }
            }
        }
        (k, free)
    }

    #[test]
    fn matches_dense_solve() {
        let mesh = plate(2, 2);
        let p = SimpParams::default();
        let rho = vec![1.0; 4];
        let mut f = vec![0.0; mesh.n_dofs()];
        f[2 * mesh.node(1, 0) + 1] = -1.0;
        let fac = assemble_and_factor(&mesh, &rho, &p, SolverKind::Direct).unwrap();
        let u = fac.solve(&f).unwrap();
        let (k, free) = dense_reduced(&mesh, &rho, &p);
        let rhs = DVector::from_iterator(free.len(), free.iter().map(|&d| f[d]));
        let x = k.cholesky().unwrap().solve(&rhs);
        let scale = x.amax();
        for (idx, &d) in free.iter().enumerate() {
            assert!((u[d] - x[idx]).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn cg_matches_direct() {
        let mesh = plate(6, 4);
        let p = SimpParams::default();
        let rho: Vec<f64> = (0..24).map(|e| 0.2 + 0.03 * e as f64).collect();
        let mut f = vec![0.0; mesh.n_dofs()];
        f[2 * mesh.node(3, 0) + 1] = -1.0;
        f[2 * mesh.node(6, 0)] = 0.4;
        let a = assemble_and_factor(&mesh, &rho, &p, SolverKind::Direct).unwrap().solve(&f).unwrap();
        let cg = assemble_and_factor(&mesh, &rho, &p, SolverKind::Cg).unwrap();
        assert!(!cg.is_direct());
        let b = cg.solve(&f).unwrap();
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8 * scale);
        }
    }

    #[test]
    fn tall_mesh_uses_row_numbering() {
        let mesh = plate(3, 9);
        let p = SimpParams::default();
        let fac = assemble_and_factor(&mesh, &vec![0.7; 27], &p, SolverKind::Direct).unwrap();
        let mut f = vec![0.0; mesh.n_dofs()];
        f[2 * mesh.node(0, 0)] = 1.0;
        let u = fac.solve(&f).unwrap();
        assert!(fac.relative_residual(&u, &f) < 1e-12);
    }

    #[test]
    fn inverse_scaling_without_floor() {
        let mesh = plate(4, 3);
        let p = SimpParams {
            emin: 1e-300,
            ..SimpParams::default()
        };
        let rho: Vec<f64> = (0..12).map(|e| 0.3 + 0.05 * e as f64).collect();
        let c: f64 = 0.5;
        // ρ' = c^(1/p) ρ multiplies every modulus by c
        let rho2: Vec<f64> = rho.iter().map(|r| c.powf(1.0 / p.penal) * r).collect();
        let mut f = vec![0.0; mesh.n_dofs()];
        f[1] = -1.0;
        let u1 = assemble_and_factor(&mesh, &rho, &p, SolverKind::Direct).unwrap().solve(&f).unwrap();
        let u2 = assemble_and_factor(&mesh, &rho2, &p, SolverKind::Direct).unwrap().solve(&f).unwrap();
        for (a, b) in u1.iter().zip(&u2) {
            assert!((b - a / c).abs() <= 1e-10 * (a / c).abs().max(1e-30));
        }
    }

    #[test]
    fn void_design_still_solves() {
        let mesh = plate(5, 5);
        let fac = assemble_and_factor(&mesh, &vec![0.0; 25], &SimpParams::default(), SolverKind::Auto).unwrap();
        let mut f = vec![0.0; mesh.n_dofs()];
        f[1] = -1.0;
        let u = fac.solve(&f).unwrap();
        assert!(u.iter().all(|v| v.is_finite()));
        assert!(fac.relative_residual(&u, &f) < 1e-8);
    }

    #[test]
    fn unsupported_mesh_is_structural_error() {
        // a single pinned node leaves rotation free
        let nodes: Vec<usize> = (0..=3).map(|i| i * 4).collect();
        let mesh = Mesh::new(3, 3, 1.0, vec![0, 1], LoadEdge { nodes, direction: [0.0, 1.0] }).unwrap();
        let err = assemble_and_factor(&mesh, &vec![1.0; 9], &SimpParams::default(), SolverKind::Direct).unwrap_err();
        assert!(matches!(err, RtoError::Structural(_)), "{err}");
    }

    #[test]
    fn rejects_out_of_range_density() {
        let mesh = plate(2, 2);
        assert!(assemble_and_factor(&mesh, &[1.0, 1.2, 0.0, 0.5], &SimpParams::default(), SolverKind::Auto).is_err());
    }
}
