//! Desk-scale carrier plate: robust design against the deterministic design,
//! both judged under the same p-box. Pass `full` to run the 200 x 200 plate.

use std::path::Path;

use imprecise_rto::io::{self, RunConfig};
use imprecise_rto::optimizer::{evaluate_design, run_rto};

fn preview(rho: &[f64], nx: usize, step: usize) {
    for row in rho.chunks(nx).step_by(step) {
        let line: String = row.iter().step_by(step).map(|v| if *v > 0.5 { '#' } else { '.' }).collect();
        println!("{line}");
    }
}

fn main() -> imprecise_rto::Result<()> {
    env_logger::init();
    let name = if std::env::args().any(|a| a == "full") { "carrier_plate" } else { "carrier_plate_desk" };
    let mut cfg = RunConfig::from_path(&Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("configs/{name}.cfg")))?;
    cfg.output.dir = std::env::temp_dir().join(name);

    let rto = io::optimize(&cfg)?.result;
    let problem = cfg.problem()?;
    let dto = run_rto(&problem.deterministic()?)?;
    let dto_bounds = evaluate_design(&problem, &dto.state.rho_phys)?;

    let b = &rto.bounds;
    println!("robust        {:?} after {} iterations", rto.status, rto.state.iter);
    println!("  J [{:.3}, {:.3}]  mu [{:.3}, {:.3}]  sigma [{:.3}, {:.3}]", b.objective.lo, b.objective.hi, b.mean.lo, b.mean.hi, b.std_dev.lo, b.std_dev.hi);
    let d = &dto_bounds;
    println!("deterministic {:?} after {} iterations", dto.status, dto.state.iter);
    println!("  J [{:.3}, {:.3}]  mu [{:.3}, {:.3}]  sigma [{:.3}, {:.3}]", d.objective.lo, d.objective.hi, d.mean.lo, d.mean.hi, d.std_dev.lo, d.std_dev.hi);
    let step = cfg.mesh.nx.div_ceil(60);
    println!("robust layout:");
    preview(&rto.state.rho_phys, cfg.mesh.nx, step);
    println!("deterministic layout:");
    preview(&dto.state.rho_phys, cfg.mesh.nx, step);
    println!("artifacts in {}", cfg.output.dir.display());
    Ok(())
}
