use std::path::Path;

use imprecise_rto::io::{density_csv, density_pgm, history_csv, read_density_csv, read_history_csv, RunConfig};
use imprecise_rto::optimizer::HistoryRecord;
use imprecise_rto::RtoError;

fn bundled(name: &str) -> RunConfig {
    RunConfig::from_path(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)).unwrap()
}

#[test]
fn checkerboard_graymap_golden() {
    let pgm = density_pgm(&[1.0, 0.0, 0.0, 1.0], 2, 2, "checker").unwrap();
    assert_eq!(pgm, "P2\n# checker\n2 2\n255\n0 255\n255 0\n");
}

#[test]
fn graymap_rounds_intermediate_densities() {
    let pgm = density_pgm(&[0.5, 0.25, 0.999, 0.001], 4, 1, "").unwrap();
    assert!(pgm.ends_with("128 191 0 255\n"), "{pgm}");
}

#[test]
fn density_csv_round_trips() {
    let rho: Vec<f64> = (0..12).map(|k| (k as f64 * 0.37).sin().abs()).collect();
    let (back, nx, ny) = read_density_csv(&density_csv(&rho, 4, 3).unwrap()).unwrap();
    assert_eq!((nx, ny), (4, 3));
    assert_eq!(back, rho);
}

#[test]
fn history_round_trips() {
    let recs: Vec<HistoryRecord> = (1..=3)
        .map(|k| HistoryRecord {
            iter: k,
            j_lo: 1.0 / k as f64,
            j_hi: 2.0 / k as f64,
            mu_lo: 0.5,
            mu_hi: 0.75,
            sigma_lo: 0.1,
            sigma_hi: 0.3,
            volfrac: 0.3,
            max_change: 0.2 / k as f64,
        })
        .collect();
    let text = history_csv(&recs);
    assert!(text.starts_with("iter,J_lo,J_hi,mu_lo,mu_hi,sigma_lo,sigma_hi,volfrac,max_change\n"));
    assert_eq!(read_history_csv(&text).unwrap(), recs);
}

#[test]
fn bundled_plate_resolves() {
    let cfg = bundled("carrier_plate.cfg");
    cfg.validate().unwrap();
    assert_eq!((cfg.mesh.nx, cfg.mesh.ny), (200, 200));
    assert_eq!(cfg.optimizer.volfrac, 0.3);
    assert_eq!(cfg.filter.radius, 3.0);
    assert_eq!(cfg.uncertainty.as_ref().unwrap().corr_len, Some(10.0));
    assert_eq!(cfg.objective.beta, 1.0);
    assert_eq!(cfg.basis().unwrap().order(), 14);
}

#[test]
fn every_bundled_config_validates() {
    for entry in std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let cfg = RunConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn hash_ignores_output_dir_but_not_seed() {
    let a = bundled("carrier_plate_desk.cfg");
    let mut b = a.clone();
    b.output.dir = "elsewhere".into();
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), a.clone().with_seed(9).hash());
}

fn config_key(text: &str) -> String {
    match RunConfig::from_toml(text).and_then(|c| c.validate().map(|_| c)) {
        Err(RtoError::Config { key, .. }) => key,
        other => panic!("expected a config error, got {other:?}"),
    }
}

const BASE: &str = r#"
[mesh]
nx = 10
ny = 10
supports = "bottom_fixed"
[mesh.load]
side = "top"
[uncertainty]
corr_len = 2.0
order = 3
mu = [-1.2, -0.8]
sigma = [0.4, 0.6]
"#;

#[test]
fn config_errors_name_the_key() {
    assert_eq!(config_key(&format!("{BASE}[objective]\nw1 = 0.7\nw2 = 0.5\n")), "objective.w1");
    assert_eq!(config_key(&format!("{BASE}[optimizer]\nvolfrac = 0.3\nmove_limt = 0.1\n")), "optimizer.move_limt");
    assert_eq!(config_key(&format!("{BASE}[objective]\nbeta = -1.0\n")), "objective.beta");
    assert_eq!(config_key("[mesh\nnx = 3"), "<syntax>");
    assert_eq!(config_key("[mesh]\nnx = 10\nny = 10\n[mesh.load]\nside = \"top\"\n"), "uncertainty");
}
