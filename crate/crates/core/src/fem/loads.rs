use super::mesh::Mesh;
use crate::random_field::KLBasis;
use crate::{Result, RtoError};

/// Superposition load cases: `f_0` for the mean, `f_i = √λ_i ψ_i` for each
/// K-L term, all as global nodal force vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadCaseSet {
    pub cases: Vec<Vec<f64>>,
    pub mu_ref: f64,
    pub sigma_ref: f64,
}

impl LoadCaseSet {
    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    /// `Σ ξ_i f_i`, the load of one realization.
    pub fn combine(&self, xi: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; self.cases[0].len()];
        for (case, &z) in self.cases.iter().zip(xi) {
            for (a, b) in f.iter_mut().zip(case) {
                *a += z * b;
            }
        }
        f
    }
}

/// Trapezoidal lumping of a line load sampled at the load-edge nodes.
///
/// Each edge segment sends half its length times the nodal value to each of
/// its two nodes, along the load direction.
pub fn lump_line_load(mesh: &Mesh, values: &[f64]) -> Result<Vec<f64>> {
    let nodes = &mesh.load_edge.nodes;
    if values.len() != nodes.len() {
        return Err(RtoError::InvalidInput(format!(
            "{} nodal values for {} load-edge nodes",
            values.len(),
            nodes.len()
        )));
    }
    let [dx, dy] = mesh.load_edge.direction;
    let mut f = vec![0.0; mesh.n_dofs()];
    for k in 0..nodes.len() - 1 {
        let (a, b) = (nodes[k], nodes[k + 1]);
        let pa = mesh.node_coords(a);
        let pb = mesh.node_coords(b);
        let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
        for (n, v) in [(a, values[k]), (b, values[k + 1])] {
            f[2 * n] += 0.5 * len * v * dx;
            f[2 * n + 1] += 0.5 * len * v * dy;
        }
    }
    Ok(f)
}

/// Builds `f_0 = mu_ref · (unit line load)` and `f_i` from `basis` rescaled
/// to standard deviation `sigma_ref`.
pub fn build_load_cases(mesh: &Mesh, basis: &KLBasis, mu_ref: f64, sigma_ref: f64) -> Result<LoadCaseSet> {
    let half = 0.5 * mesh.load_edge_length();
    if (basis.half_width() - half).abs() > 1e-9 * half.max(1.0) {
        return Err(RtoError::InvalidInput(format!(
            "K-L domain half-width {} does not match the load edge half-length {half}",
            basis.half_width()
        )));
    }
    let xs = mesh.load_edge_coords();
    let scaled = basis.scaled(sigma_ref);
    let mut cases = Vec::with_capacity(basis.order() + 1);
    cases.push(lump_line_load(mesh, &vec![mu_ref; xs.len()])?);
    for i in 0..scaled.order() {
        let amp = scaled.lambdas[i].sqrt();
        let vals: Vec<f64> = xs.iter().map(|&x| amp * scaled.eval_eigenfunction(i, x)).collect();
        cases.push(lump_line_load(mesh, &vals)?);
    }
    Ok(LoadCaseSet {
        cases,
        mu_ref,
        sigma_ref,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::{LoadEdge, Side, SupportPreset};
    use crate::random_field::{kl_basis, realize_field, standard_normals, ExponentialKernel, Parity};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plate(n: usize) -> Mesh {
        let fixed = Mesh::preset_dofs(n, n, SupportPreset::BottomFixed);
        let nodes: Vec<usize> = (0..=n).map(|i| i * (n + 1)).collect();
        let m = Mesh::new(n, n, 1.0, fixed, LoadEdge { nodes, direction: [0.0, 1.0] }).unwrap();
        assert_eq!(m.side_nodes(Side::Top, 0, n).unwrap(), m.load_edge.nodes);
        m
    }

    fn basis(n: usize, m: usize) -> KLBasis {
        kl_basis(ExponentialKernel::new(1.0, 2.0, n as f64 / 2.0).unwrap(), m).unwrap()
    }

    #[test]
    fn mean_case_resultant() {
        let mesh = plate(10);
        let set = build_load_cases(&mesh, &basis(10, 4), -1.3, 0.8).unwrap();
        let fy: f64 = set.cases[0].iter().skip(1).step_by(2).sum();
        let fx: f64 = set.cases[0].iter().step_by(2).sum();
        assert!((fy - -13.0).abs() < 1e-12);
        assert_eq!(fx, 0.0);
        assert_eq!(set.len(), 5);
    }

    #[test]
    fn fluctuation_resultants() {
        let mesh = plate(20);
        let b = basis(20, 6);
        let set = build_load_cases(&mesh, &b, -1.0, 1.0).unwrap();
        for i in 0..6 {
            let fy: f64 = set.cases[i + 1].iter().skip(1).step_by(2).sum();
            let exact = b.lambdas[i].sqrt() * b.eigenfunction_integral(i);
            match b.parity[i] {
                Parity::Sine => assert!(fy.abs() < 1e-12, "term {i}: {fy}"),
                // trapezoid error bound (b - a) h² max|f''| / 12 with h = 1
                Parity::Cosine => {
                    let w = b.freqs[i];
                    let peak = b.lambdas[i].sqrt() * b.eval_eigenfunction(i, 0.0).abs();
                    let bound = 20.0 * w * w * peak / 12.0;
                    assert!((fy - exact).abs() <= bound, "term {i}: {fy} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn superposed_cases_equal_lumped_realization() {
        let mesh = plate(12);
        let b = basis(12, 5);
        let set = build_load_cases(&mesh, &b, -1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xi = standard_normals(&mut rng, 6);
        let combined = set.combine(&xi);
        // direct route: realize the field with mean mu·ξ_0, lump it
        let field = realize_field(&b, -1.0 * xi[0], &xi[1..], &mesh.load_edge_coords()).unwrap();
        let direct = lump_line_load(&mesh, &field.values).unwrap();
        for (a, d) in combined.iter().zip(&direct) {
            assert!((a - d).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_mismatch() {
        let mesh = plate(10);
        assert!(build_load_cases(&mesh, &basis(12, 3), -1.0, 1.0).is_err());
    }
}
