//! Density filter followed by the volume-preserving Heaviside projection at
//! increasing sharpness.

use imprecise_rto::filter::{heaviside_project, linear_filter, AlphaSchedule, FilterState};

fn main() -> imprecise_rto::Result<()> {
    let (nx, ny) = (40, 20);
    let rho: Vec<f64> = (0..nx * ny)
        .map(|e| {
            let (x, y) = ((e % nx) as f64, (e / nx) as f64);
            if (x - 20.0).abs() < 6.0 || (y - 10.0).abs() < 2.0 { 0.9 } else { 0.1 }
        })
        .collect();
    let filter = FilterState::new(nx, ny, 1.0, 3.0)?;
    let rho_bar = linear_filter(&rho, &filter)?;
    let vol = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!("raw volume {:.6}  filtered {:.6}", vol(&rho), vol(&rho_bar));

    let schedule = AlphaSchedule::default();
    for iter in [1, 31, 61, 91, 121, 151, 181] {
        let alpha = schedule.alpha(iter);
        let (phys, eta) = heaviside_project(&rho_bar, alpha)?;
        let grey = phys.iter().filter(|v| **v > 0.05 && **v < 0.95).count();
        println!(
            "iter {iter:3}  alpha {alpha:4}  eta {eta:.4}  volume {:.6}  grey elements {grey}",
            vol(&phys)
        );
    }
    Ok(())
}
