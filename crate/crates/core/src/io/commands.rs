use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::writers::{
    bounds_toml, distribution_envelopes, envelopes_csv, ks_distance, provenance, read_density_csv,
    write_density_outputs, write_history,
};
use crate::bounds::{monotonicity_report, MomentBounds, MonotonicityReport, QMCS_SKIP, QMCS_STRIDE};
use crate::fem::{assemble_and_factor, compliance_matrix, lump_line_load, solve_cases};
use crate::filter::AlphaSchedule;
use crate::moments::quadratic_form;
use crate::optimizer::{
    analyze_design, reference_load_cases, reference_point, run_rto_with, BoundEngine, Problem, RunResult,
};
use crate::random_field::{kl_basis, realize_field, standard_normals, ExponentialKernel, Parity, PBox};
use crate::{Result, RtoError};

/// Settings that shaped a run but are not in the config file.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub kl_order: usize,
    pub kl_energy_fraction: f64,
    pub pbox: PBox,
    pub reference: (f64, f64),
    pub alpha_schedule: AlphaSchedule,
    pub qmcs_skip: u64,
    pub qmcs_stride: u64,
    /// Linear inertia schedule of the swarm, when the swarm engine runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pso_inertia: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_hash: String,
    seed: u64,
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<toml::Table>,
    metadata: RunMetadata,
    config: &'a RunConfig,
}

fn metadata(cfg: &RunConfig, problem: &Problem) -> RunMetadata {
    let basis = problem.basis.as_ref();
    RunMetadata {
        kl_order: basis.map_or(0, |b| b.order()),
        kl_energy_fraction: basis.map_or(0.0, |b| b.energy_fraction),
        pbox: problem.pbox,
        reference: reference_point(&problem.pbox),
        alpha_schedule: cfg.filter.alpha,
        qmcs_skip: QMCS_SKIP,
        qmcs_stride: QMCS_STRIDE,
        pso_inertia: match problem.engine {
            BoundEngine::Pso(s) => Some([s.w_start, s.w_end]),
            _ => None,
        },
    }
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_manifest(
    cfg: &RunConfig,
    problem: &Problem,
    command: &str,
    dir: &Path,
    files: &mut Vec<PathBuf>,
    summary: Option<toml::Table>,
) -> Result<()> {
    let path = dir.join("manifest.toml");
    let outputs = files
        .iter()
        .chain(std::iter::once(&path))
        .map(|p| p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        outputs,
        summary,
        metadata: metadata(cfg, problem),
        config: cfg,
    };
    let text = toml::to_string(&manifest).map_err(|e| RtoError::InvalidInput(format!("manifest: {e}")))?;
    std::fs::write(&path, text)?;
    files.push(path);
    Ok(())
}

fn table<T: Serialize>(value: &T) -> toml::Table {
    toml::Table::try_from(value).expect("summary serializes to a table")
}

/// Reads a physical design, or the uniform design at the volume fraction.
pub fn load_design(cfg: &RunConfig, design: Option<&Path>) -> Result<Vec<f64>> {
    let (nx, ny) = (cfg.mesh.nx, cfg.mesh.ny);
    match design {
        None => Ok(vec![cfg.optimizer.volfrac; nx * ny]),
        Some(path) => {
            let (rho, dx, dy) = read_density_csv(&std::fs::read_to_string(path)?)?;
            if (dx, dy) != (nx, ny) {
                return Err(RtoError::InvalidInput(format!(
                    "design {} is {dx} x {dy}, the mesh is {nx} x {ny}",
                    path.display()
                )));
            }
            Ok(rho)
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub result: RunResult,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct OptimizeSummary<'a> {
    status: crate::optimizer::RunStatus,
    iterations: usize,
    final_alpha: f64,
    final_eta: f64,
    corner_switches: usize,
    bounds: &'a MomentBounds,
}

/// Full pipeline: optimize, then write the design, history, bounds,
/// distribution envelopes and manifest.
pub fn optimize(cfg: &RunConfig) -> Result<OptimizeOutcome> {
    let problem = cfg.problem()?;
    let dir = out_dir(cfg)?;
    let result = run_rto_with(&problem, |_| {})?;
    let (hash, seed) = (cfg.hash(), cfg.seed);
    let comment = provenance(&hash, seed);
    let (nx, ny) = (cfg.mesh.nx, cfg.mesh.ny);

    let (pgm, csv) = write_density_outputs(&result.state.rho_phys, nx, ny, &dir, "density", &comment)?;
    let mut files = vec![pgm, csv];
    let history = dir.join("history.csv");
    write_history(&result.state.history, &history)?;
    files.push(history);
    let bounds = dir.join("bounds.toml");
    std::fs::write(&bounds, bounds_toml(&result.bounds, &hash, seed))?;
    files.push(bounds);

    let an = analyze_design(&problem, &result.state.rho_phys)?;
    let env = distribution_envelopes(
        &an.c_ref,
        result.reference,
        &problem.pbox,
        problem.objective.beta,
        problem.mode,
        cfg.output.envelope_samples,
        cfg.output.envelope_grid,
        seed,
    )?;
    let envelopes = dir.join("envelopes.csv");
    std::fs::write(&envelopes, envelopes_csv(&env))?;
    files.push(envelopes);

    let summary = OptimizeSummary {
        status: result.status,
        iterations: result.state.iter,
        final_alpha: result.alpha,
        final_eta: result.eta,
        corner_switches: result.corner_switches,
        bounds: &result.bounds,
    };
    write_manifest(cfg, &problem, "optimize", &dir, &mut files, Some(table(&summary)))?;
    Ok(OptimizeOutcome { result, files })
}

#[derive(Debug, Clone)]
pub struct BoundsOutcome {
    pub bounds: MomentBounds,
    pub files: Vec<PathBuf>,
}

/// Bounds and envelopes of a fixed design.
pub fn bounds(cfg: &RunConfig, design: Option<&Path>) -> Result<BoundsOutcome> {
    let problem = cfg.problem()?;
    let rho = load_design(cfg, design)?;
    let dir = out_dir(cfg)?;
    let an = analyze_design(&problem, &rho)?;
    let (hash, seed) = (cfg.hash(), cfg.seed);
    let path = dir.join("bounds.toml");
    std::fs::write(&path, bounds_toml(&an.bounds, &hash, seed))?;
    let mut files = vec![path];
    let env = distribution_envelopes(
        &an.c_ref,
        reference_point(&problem.pbox),
        &problem.pbox,
        problem.objective.beta,
        problem.mode,
        cfg.output.envelope_samples,
        cfg.output.envelope_grid,
        seed,
    )?;
    let path = dir.join("envelopes.csv");
    std::fs::write(&path, envelopes_csv(&env))?;
    files.push(path);
    write_manifest(cfg, &problem, "bounds", &dir, &mut files, None)?;
    Ok(BoundsOutcome { bounds: an.bounds, files })
}

#[derive(Debug, Clone)]
pub struct FieldOutcome {
    pub order: usize,
    pub energy_fraction: f64,
    pub files: Vec<PathBuf>,
}

/// Per-draw coefficient stream, independent of how many draws are made.
fn coefficients(seed: u64, draw: usize, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw as u64);
    standard_normals(&mut rng, n)
}

/// Eigenpairs and `count` load realizations along the load edge at the
/// reference parameters.
pub fn field(cfg: &RunConfig, count: usize) -> Result<FieldOutcome> {
    let problem = cfg.problem()?;
    let basis = problem.basis.as_ref().expect("config problems carry a basis");
    let (mu_ref, sigma_ref) = reference_point(&problem.pbox);
    let scaled = basis.scaled(sigma_ref);
    let dir = out_dir(cfg)?;
    let mut files = Vec::new();

    let mut eig = String::from("index,omega,parity,lambda\n");
    for i in 0..scaled.order() {
        let parity = match scaled.parity[i] {
            Parity::Cosine => "cosine",
            Parity::Sine => "sine",
        };
        writeln!(eig, "{},{},{parity},{}", i + 1, scaled.freqs[i], scaled.lambdas[i]).unwrap();
    }
    let path = dir.join("eigenpairs.csv");
    std::fs::write(&path, eig)?;
    files.push(path);

    let xs = problem.mesh.load_edge_coords();
    let draws: Vec<Vec<f64>> = (0..count)
        .map(|k| {
            let xi = coefficients(cfg.seed, k, scaled.order() + 1);
            realize_field(&scaled, xi[0] * mu_ref, &xi[1..], &xs).map(|r| r.values)
        })
        .collect::<Result<_>>()?;
    let mut out = String::from("x");
    for k in 0..count {
        write!(out, ",r{}", k + 1).unwrap();
    }
    out.push('\n');
    for (j, x) in xs.iter().enumerate() {
        write!(out, "{x}").unwrap();
        for d in &draws {
            write!(out, ",{}", d[j]).unwrap();
        }
        out.push('\n');
    }
    let path = dir.join("field.csv");
    std::fs::write(&path, out)?;
    files.push(path);
    write_manifest(cfg, &problem, "field", &dir, &mut files, None)?;
    Ok(FieldOutcome {
        order: scaled.order(),
        energy_fraction: scaled.energy_fraction,
        files,
    })
}

#[derive(Debug, Clone)]
pub struct MonotonicityOutcome {
    pub report: MonotonicityReport,
    pub files: Vec<PathBuf>,
}

/// Slope signs of the compliance moments across the p-box for a fixed design.
pub fn monotonicity(cfg: &RunConfig, design: Option<&Path>, n_sweep: usize) -> Result<MonotonicityOutcome> {
    let problem = cfg.problem()?;
    let rho = load_design(cfg, design)?;
    let dir = out_dir(cfg)?;
    let an = analyze_design(&problem, &rho)?;
    let (mu_ref, sigma_ref) = reference_point(&problem.pbox);
    let report = monotonicity_report(&an.c_ref, mu_ref, sigma_ref, &problem.pbox, n_sweep, problem.mode)?;
    let path = dir.join("monotonicity.toml");
    let text = toml::to_string(&report).map_err(|e| RtoError::InvalidInput(format!("report: {e}")))?;
    std::fs::write(&path, format!("# {}\n{text}", provenance(&cfg.hash(), cfg.seed)))?;
    let mut files = vec![path];
    write_manifest(cfg, &problem, "monotonicity", &dir, &mut files, None)?;
    Ok(MonotonicityOutcome { report, files })
}

/// Superposition against direct realizations of a fixed design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub samples: usize,
    pub order: usize,
    pub direct_order: usize,
    /// Two-sample Kolmogorov-Smirnov distance.
    pub ks_distance: f64,
    /// `Σ |c_sup - c_dir| / Σ c_dir` over matched draws.
    pub relative_error: f64,
    pub mean_superposition: f64,
    pub mean_direct: f64,
}

impl VerifyReport {
    pub const KS_LIMIT: f64 = 0.05;
    pub const ERROR_LIMIT: f64 = 0.02;

    pub fn passed(&self) -> bool {
        self.ks_distance < Self::KS_LIMIT && self.relative_error < Self::ERROR_LIMIT
    }
}

/// Paired compliance samples: `ξᵀ C ξ` from the truncated expansion and
/// `fᵀ u` from loads realized with `direct_order` terms, sharing the
/// leading coefficients.
pub fn verify_samples(problem: &Problem, rho: &[f64], samples: usize, direct_order: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let basis = problem
        .basis
        .as_ref()
        .ok_or_else(|| RtoError::InvalidInput("verification needs a random field".into()))?;
    let m = basis.order();
    if direct_order < m {
        return Err(RtoError::config(
            "verify.direct_order",
            format!("must be at least the K-L order {m}, got {direct_order}"),
        ));
    }
    let reference = reference_point(&problem.pbox);
    let (mu_ref, sigma_ref) = reference;
    let loads = reference_load_cases(problem, reference)?;
    let k = assemble_and_factor(&problem.mesh, rho, &problem.simp, problem.settings.solver)?;
    let c = compliance_matrix(&loads, &solve_cases(&k, &loads)?)?;
    let kernel = ExponentialKernel::new(sigma_ref, basis.kernel.corr_len, basis.half_width())?;
    let direct = kl_basis(kernel, direct_order)?;
    let xs = problem.mesh.load_edge_coords();

    let pairs: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let xi = coefficients(seed, s, direct_order + 1);
            let sup = quadratic_form(&c, &xi[..m + 1]);
            let field = realize_field(&direct, xi[0] * mu_ref, &xi[1..], &xs)?;
            let f = lump_line_load(&problem.mesh, &field.values)?;
            let u = k.solve(&f)?;
            let dir: f64 = f.iter().zip(&u).map(|(a, b)| a * b).sum();
            Ok((sup, dir))
        })
        .collect::<Result<_>>()?;
    let (sup, dir) = pairs.into_iter().unzip();
    Ok((sup, dir, m))
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub report: VerifyReport,
    pub files: Vec<PathBuf>,
}

pub fn verify(cfg: &RunConfig, design: Option<&Path>) -> Result<VerifyOutcome> {
    let problem = cfg.problem()?;
    let rho = load_design(cfg, design)?;
    let dir = out_dir(cfg)?;
    let v = cfg.verify;
    let direct_order = v
        .direct_order
        .unwrap_or(problem.mesh.load_edge.nodes.len() - 1)
        .max(problem.basis.as_ref().map_or(0, |b| b.order()));
    let (sup, direct, order) = verify_samples(&problem, &rho, v.samples, direct_order, cfg.seed)?;
    let n = v.samples as f64;
    let report = VerifyReport {
        samples: v.samples,
        order,
        direct_order,
        ks_distance: ks_distance(&sup, &direct),
        relative_error: sup.iter().zip(&direct).map(|(a, b)| (a - b).abs()).sum::<f64>()
            / direct.iter().sum::<f64>(),
        mean_superposition: sup.iter().sum::<f64>() / n,
        mean_direct: direct.iter().sum::<f64>() / n,
    };
    let mut out = String::from("sample,superposition,direct\n");
    for (k, (a, b)) in sup.iter().zip(&direct).enumerate() {
        writeln!(out, "{k},{a},{b}").unwrap();
    }
    let mut files = Vec::new();
    let path = dir.join("verify.csv");
    std::fs::write(&path, out)?;
    files.push(path);
    write_manifest(cfg, &problem, "verify", &dir, &mut files, Some(table(&report)))?;
    Ok(VerifyOutcome { report, files })
}
