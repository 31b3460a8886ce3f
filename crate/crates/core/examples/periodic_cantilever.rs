//! Desk-scale periodic cantilever: one unit cell is designed and tiled over
//! the beam. Pass `full` for the 300 x 90 beam.

use std::path::Path;

use imprecise_rto::io::{self, RunConfig};
use imprecise_rto::optimizer::PeriodicLayout;

fn main() -> imprecise_rto::Result<()> {
    env_logger::init();
    let name = if std::env::args().any(|a| a == "full") { "cantilever" } else { "cantilever_desk" };
    let mut cfg = RunConfig::from_path(&Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("configs/{name}.cfg")))?;
    cfg.output.dir = std::env::temp_dir().join(name);

    let r = io::optimize(&cfg)?.result;
    let p = cfg.periodic.expect("periodic config");
    let layout = PeriodicLayout::for_mesh(cfg.mesh.nx, cfg.mesh.ny, p.cells_x, p.cells_y)?;
    let b = &r.bounds;
    println!("{:?} after {} iterations", r.status, r.state.iter);
    println!("J [{:.3}, {:.3}]  mu [{:.3}, {:.3}]  sigma [{:.3}, {:.3}]", b.objective.lo, b.objective.hi, b.mean.lo, b.mean.hi, b.std_dev.lo, b.std_dev.hi);
    println!("cells identical: {}", layout.cells_identical(&r.state.rho_phys));
    for row in layout.extract_cell(&r.state.rho_phys, 0, 0).chunks(layout.cell_nx) {
        println!("{}", row.iter().map(|v| if *v > 0.5 { '#' } else { '.' }).collect::<String>());
    }
    println!("artifacts in {}", cfg.output.dir.display());
    Ok(())
}
