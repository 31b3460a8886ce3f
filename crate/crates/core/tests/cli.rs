use std::path::{Path, PathBuf};
use std::process::Command;

const SMALL: &str = r#"
seed = 3
[mesh]
nx = 16
ny = 16
supports = "bottom_fixed"
[mesh.load]
side = "top"
[filter]
radius = 1.5
[uncertainty]
corr_len = 2.0
order = 4
mu = [-1.2, -0.8]
sigma = [0.4, 0.6]
[optimizer]
volfrac = 0.4
max_iter = 3
[output]
envelope_samples = 500
envelope_grid = 20
[verify]
samples = 200
"#;

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn rto(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_rto"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RTO_THREADS", "1")
        .output()
        .unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

#[test]
fn short_optimize_reports_not_converged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "small.cfg", SMALL);
    let out = dir.path().join("opt");
    let (code, _) = rto(&["optimize", cfg.to_str().unwrap()], &out);
    assert_eq!(code, 4);
    for f in ["density.pgm", "density.csv", "history.csv", "bounds.toml", "envelopes.csv", "manifest.toml"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let history = std::fs::read_to_string(out.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 4);
}

#[test]
fn analysis_subcommands_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "small.cfg", SMALL);
    let c = cfg.to_str().unwrap();
    let out = dir.path().join("a");
    assert_eq!(rto(&["bounds", c], &out).0, 0);
    assert!(out.join("bounds.toml").exists());
    assert_eq!(rto(&["field", c, "--count", "3"], &out).0, 0);
    assert!(out.join("eigenpairs.csv").exists() && out.join("field.csv").exists());
    assert_eq!(rto(&["monotonicity", c, "--points", "5"], &out).0, 0);
    assert!(out.join("monotonicity.toml").exists());
    assert_eq!(rto(&["verify", c], &out).0, 0);
    assert!(out.join("verify.csv").exists());
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let missing = dir.path().join("nope.cfg");
    assert_eq!(rto(&["bounds", missing.to_str().unwrap()], &out).0, 2);

    let cfg = write_cfg(dir.path(), "small.cfg", SMALL);
    let blocked = write_cfg(dir.path(), "file", "");
    assert_eq!(rto(&["bounds", cfg.to_str().unwrap()], &blocked.join("sub")).0, 1);

    let bad = write_cfg(dir.path(), "bad.cfg", &format!("{SMALL}[objective]\nw1 = 0.7\nw2 = 0.5\n"));
    let (code, err) = rto(&["bounds", bad.to_str().unwrap()], &out);
    assert_eq!(code, 2);
    assert!(err.contains("objective.w1"), "{err}");

    let straddle = write_cfg(dir.path(), "straddle.cfg", &SMALL.replace("mu = [-1.2, -0.8]", "mu = [-0.5, 0.5]"));
    assert_eq!(rto(&["bounds", straddle.to_str().unwrap()], &out).0, 2);
}
