//! Element sensitivities of `mu + beta sigma` from the eigendecomposition of
//! the weight matrix against the pairwise double sum and finite differences.

use imprecise_rto::fem::{
    assemble_and_factor, build_load_cases, compliance_matrix, solve_cases, LoadEdge, Mesh, Side, SimpParams,
    SolverKind, SupportPreset,
};
use imprecise_rto::moments::{compliance_moments, VarianceMode};
use imprecise_rto::random_field::{kl_basis, ExponentialKernel};
use imprecise_rto::sensitivity::{ost_decompose, sensitivity_direct, sensitivity_field, weight_matrix};

fn main() -> imprecise_rto::Result<()> {
    let n = 10;
    let mesh = Mesh::new(
        n,
        n,
        1.0,
        Mesh::preset_dofs(n, n, SupportPreset::BottomFixed),
        LoadEdge { nodes: Mesh::side_span(n, n, Side::Top, 0, n)?, direction: [0.0, 1.0] },
    )?;
    let params = SimpParams::default();
    let loads = build_load_cases(&mesh, &kl_basis(ExponentialKernel::new(1.0, 2.0, 5.0)?, 4)?, -1.0, 0.5)?;
    let rho: Vec<f64> = (0..n * n).map(|e| 0.3 + 0.6 * ((e * 37 % 100) as f64 / 100.0)).collect();
    let beta = 2.0;
    let mode = VarianceMode::IsserlisFull;

    let objective = |rho: &[f64]| -> imprecise_rto::Result<f64> {
        let k = assemble_and_factor(&mesh, rho, &params, SolverKind::Direct)?;
        let c = compliance_matrix(&loads, &solve_cases(&k, &loads)?)?;
        Ok(compliance_moments(&c, mode).objective(beta))
    };

    let k = assemble_and_factor(&mesh, &rho, &params, SolverKind::Direct)?;
    let u = solve_cases(&k, &loads)?;
    let c = compliance_matrix(&loads, &u)?;
    let w = weight_matrix(&c, beta, compliance_moments(&c, mode).std_dev, mode)?;
    let ost = ost_decompose(&w)?;
    println!("weight eigenvalues {:?}", ost.eigvals);
    let fast = sensitivity_field(&u, &ost, &rho, &params, &mesh)?;
    let slow = sensitivity_direct(&u, &w, &rho, &params, &mesh)?;

    println!(" elem        OST     double sum   finite diff");
    for e in [0, 7, 33, 58, 99] {
        let h = 1e-6;
        let (mut p, mut m) = (rho.clone(), rho.clone());
        p[e] += h;
        m[e] -= h;
        let fd = (objective(&p)? - objective(&m)?) / (2.0 * h);
        println!("{e:5}  {:12.6}  {:12.6}  {:12.6}", fast.values[e], slow.values[e], fd);
    }
    Ok(())
}
