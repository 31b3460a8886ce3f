//! Closed-form mean and variance of the quadratic compliance form against
//! Monte Carlo, for both variance conventions.

use imprecise_rto::fem::ComplianceMatrix;
use imprecise_rto::moments::{compliance_moments, mc_compliance_oracle, VarianceMode};
use imprecise_rto::random_field::standard_normals;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> imprecise_rto::Result<()> {
    let n = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = DMatrix::from_vec(n, n, standard_normals(&mut rng, n * n));
    let c = ComplianceMatrix::new(&a * a.transpose());

    let full = compliance_moments(&c, VarianceMode::IsserlisFull);
    let off = compliance_moments(&c, VarianceMode::PaperEq26);
    let mc = mc_compliance_oracle(&c, 1_000_000, 3)?;
    println!("mean       closed form {:.5}   monte carlo {:.5}", full.mean, mc.mean);
    println!("variance   isserlis-full {:.5}   paper-eq26 {:.5}   monte carlo {:.5}", full.variance, off.variance, mc.variance);
    for beta in [0.0, 1.0, 3.0] {
        println!("J(beta = {beta}) = {:.5}", full.objective(beta));
    }
    Ok(())
}
