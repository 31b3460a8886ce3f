//! Slope signs of the compliance mean and standard deviation while each
//! load parameter sweeps its interval.

use std::path::Path;

use imprecise_rto::bounds::monotonicity_report;
use imprecise_rto::io::RunConfig;
use imprecise_rto::optimizer::{analyze_design, reference_point};

fn main() -> imprecise_rto::Result<()> {
    let cfg = RunConfig::from_path(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/carrier_plate_desk.cfg"))?;
    let problem = cfg.problem()?;
    let rho = vec![cfg.optimizer.volfrac; cfg.mesh.nx * cfg.mesh.ny];
    let c = analyze_design(&problem, &rho)?.c_ref;
    let (mu, sigma) = reference_point(&problem.pbox);
    let report = monotonicity_report(&c, mu, sigma, &problem.pbox, 21, problem.mode)?;
    for e in &report.entries {
        let first = e.values.first().unwrap();
        let last = e.values.last().unwrap();
        println!("{:?} -> {:8}: {:?} ({first:.4} .. {last:.4})", e.input, e.output, e.sign);
    }
    println!("all monotone: {}", report.all_monotone());
    Ok(())
}
