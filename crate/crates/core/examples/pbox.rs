//! Parameterized p-boxes of the load from sample statistics at several
//! confidence levels, and from raw observations.

use imprecise_rto::random_field::{pbox_from_moments, pbox_from_samples, standard_normals};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> imprecise_rto::Result<()> {
    println!("mean -1, std 1.5, 48 samples");
    for ci in [0.90, 0.95, 0.99] {
        let p = pbox_from_moments(-1.0, 1.5, 48, ci)?;
        println!(
            "  CI {:.0}%: mu [{:.3}, {:.3}]  sigma [{:.3}, {:.3}]",
            ci * 100.0,
            p.mu_lo,
            p.mu_hi,
            p.sigma_lo,
            p.sigma_hi
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let obs: Vec<f64> = standard_normals(&mut rng, 30).iter().map(|z| -1.0 + 0.5 * z).collect();
    let p = pbox_from_samples(&obs, 0.9)?;
    println!("30 observations of N(-1, 0.5²) at 90%: {p:?}");
    println!("corners {:?}", p.corners());
    Ok(())
}
