use std::path::Path;

use imprecise_rto::io::{self, RunConfig};

fn run(cfg: &RunConfig, dir: &Path) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let mut cfg = cfg.clone();
    cfg.output.dir = dir.to_path_buf();
    io::optimize(&cfg).unwrap();
    let read = |f: &str| std::fs::read(dir.join(f)).unwrap();
    (read("history.csv"), read("density.pgm"), read("bounds.toml"))
}

#[test]
fn repeated_runs_are_byte_identical() {
    let mut cfg = RunConfig::from_path(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/michell_desk.cfg")).unwrap();
    cfg.optimizer.max_iter = 40;
    let tmp = tempfile::tempdir().unwrap();
    let a = run(&cfg, &tmp.path().join("a"));
    let b = run(&cfg, &tmp.path().join("b"));
    assert_eq!(a, b);
}

#[test]
fn thread_count_does_not_change_results() {
    let mut cfg = RunConfig::from_path(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/cantilever_desk.cfg")).unwrap();
    cfg.optimizer.max_iter = 10;
    let tmp = tempfile::tempdir().unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let a = one.install(|| run(&cfg, &tmp.path().join("a")));
    let b = three.install(|| run(&cfg, &tmp.path().join("b")));
    assert_eq!(a, b);
}
