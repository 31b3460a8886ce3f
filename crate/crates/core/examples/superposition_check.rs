//! Compliance samples from the truncated superposition against direct load
//! realizations solved one by one.

use std::path::Path;

use imprecise_rto::io::{self, RunConfig};

fn main() -> imprecise_rto::Result<()> {
    let mut cfg = RunConfig::from_path(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/carrier_plate_desk.cfg"))?;
    cfg.output.dir = std::env::temp_dir().join("rto_superposition_check");
    let r = io::verify(&cfg, None)?.report;
    println!("{} paired samples, K-L order {} against {}", r.samples, r.order, r.direct_order);
    println!("mean compliance: superposition {:.4}, direct {:.4}", r.mean_superposition, r.mean_direct);
    println!("KS distance {:.4}, matched relative error {:.4}", r.ks_distance, r.relative_error);
    println!("{}", if r.passed() { "agreement within limits" } else { "limits exceeded" });
    Ok(())
}
