//! Combinatorial corners, quasi-Monte Carlo and particle swarm bounds of the
//! compliance moments for the initial carrier plate design.

use std::path::Path;
use std::time::Instant;

use imprecise_rto::bounds::{ca_bounds, pso_bounds, qmcs_bounds, MomentBounds, SwarmConfig};
use imprecise_rto::io::RunConfig;
use imprecise_rto::optimizer::{analyze_design, reference_point};

fn show(b: &MomentBounds, secs: f64) {
    println!(
        "{:5} J [{:.4}, {:.4}]  mu [{:.4}, {:.4}]  sigma [{:.4}, {:.4}]  {:.2e} s",
        b.engine.name(),
        b.objective.lo,
        b.objective.hi,
        b.mean.lo,
        b.mean.hi,
        b.std_dev.lo,
        b.std_dev.hi,
        secs
    );
}

fn main() -> imprecise_rto::Result<()> {
    let cfg = RunConfig::from_path(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/carrier_plate_desk.cfg"))?;
    let problem = cfg.problem()?;
    let rho = vec![cfg.optimizer.volfrac; cfg.mesh.nx * cfg.mesh.ny];
    let c = analyze_design(&problem, &rho)?.c_ref;
    let (mu, sigma) = reference_point(&problem.pbox);
    let (pbox, beta, mode) = (&problem.pbox, problem.objective.beta, problem.mode);

    let t = Instant::now();
    let ca = ca_bounds(&c, mu, sigma, pbox, beta, mode)?;
    show(&ca, t.elapsed().as_secs_f64());
    let t = Instant::now();
    let q = qmcs_bounds(&c, mu, sigma, pbox, beta, 10_000, mode)?;
    show(&q, t.elapsed().as_secs_f64());
    let t = Instant::now();
    let p = pso_bounds(&c, mu, sigma, pbox, beta, &SwarmConfig::default(), mode)?;
    show(&p, t.elapsed().as_secs_f64());
    println!("CA encloses QMCS: {}  CA encloses PSO: {}", ca.encloses(&q, 1e-9), ca.encloses(&p, 1e-9));
    Ok(())
}
