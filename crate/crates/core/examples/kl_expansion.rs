//! K-L expansion of the exponential kernel: analytic eigenvalues against a
//! Nyström discretization, the significance check and a few realizations.

use imprecise_rto::random_field::{
    kl_basis, nystrom_eigenpairs, realize_field, significance_order, standard_normals, ExponentialKernel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> imprecise_rto::Result<()> {
    let kernel = ExponentialKernel::new(1.0, 10.0, 100.0)?;
    let basis = kl_basis(kernel, 20)?;
    let nys = nystrom_eigenpairs(kernel, 2000, 20)?;

    println!("  i   omega      lambda      nystrom     rel.err");
    for i in 0..basis.order() {
        let (a, b) = (basis.lambdas[i], nys.lambdas[i]);
        println!("{:3}  {:8.5}  {:10.5}  {:10.5}  {:9.2e}", i + 1, basis.freqs[i], a, b, (a - b).abs() / a);
    }

    let long = kl_basis(kernel, 400)?;
    for s0 in [0.7, 0.8, 0.9] {
        let t = significance_order(&long.lambdas, kernel.trace(), s0)?;
        println!("energy {s0}: M = {} (fraction {:.4})", t.order, t.energy_fraction);
    }
    let m14 = kl_basis(kernel, 14)?;
    println!("M = 14 keeps {:.4} of the trace", m14.energy_fraction);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xs: Vec<f64> = (0..=20).map(|k| -100.0 + 10.0 * k as f64).collect();
    for r in 0..3 {
        let xi = standard_normals(&mut rng, m14.order());
        let f = realize_field(&m14.scaled(1.5), -1.0, &xi, &xs)?;
        let vals: Vec<String> = f.values.iter().map(|v| format!("{v:5.2}")).collect();
        println!("realization {r}: {}", vals.join(" "));
    }
    Ok(())
}
