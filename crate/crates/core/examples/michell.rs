//! Desk-scale periodic Michell-type structure pinned at both bottom corners.
//! Pass `full` for the 360 x 120 domain.

use std::path::Path;

use imprecise_rto::io::{self, RunConfig};

fn main() -> imprecise_rto::Result<()> {
    env_logger::init();
    let name = if std::env::args().any(|a| a == "full") { "michell" } else { "michell_desk" };
    let mut cfg = RunConfig::from_path(&Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("configs/{name}.cfg")))?;
    cfg.output.dir = std::env::temp_dir().join(name);

    let r = io::optimize(&cfg)?.result;
    let b = &r.bounds;
    println!("{:?} after {} iterations", r.status, r.state.iter);
    println!("J [{:.3}, {:.3}]  mu [{:.3}, {:.3}]  sigma [{:.3}, {:.3}]", b.objective.lo, b.objective.hi, b.mean.lo, b.mean.hi, b.std_dev.lo, b.std_dev.hi);
    let step = cfg.mesh.nx.div_ceil(120);
    for row in r.state.rho_phys.chunks(cfg.mesh.nx).step_by(step) {
        println!("{}", row.iter().step_by(step).map(|v| if *v > 0.5 { '#' } else { '.' }).collect::<String>());
    }
    println!("artifacts in {}", cfg.output.dir.display());
    Ok(())
}
