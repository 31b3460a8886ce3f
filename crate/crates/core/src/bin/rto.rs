use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use imprecise_rto::io::{self, RunConfig, VerifyReport};
use imprecise_rto::RtoError;

/// Robust topology optimization under imprecise random field loads.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Overrides the seed in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory in the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full optimization and write all artifacts.
    Optimize { config: PathBuf },
    /// Bounds of a fixed design.
    Bounds {
        config: PathBuf,
        /// Density CSV; uniform at the volume fraction when absent.
        #[arg(long)]
        design: Option<PathBuf>,
    },
    /// K-L eigenpairs and load realizations.
    Field {
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Slope signs of the compliance moments across the p-box.
    Monotonicity {
        config: PathBuf,
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(long, default_value_t = 21)]
        points: usize,
    },
    /// Superposition against direct load realizations.
    Verify {
        config: PathBuf,
        #[arg(long)]
        design: Option<PathBuf>,
    },
}

fn threads() -> Result<(), RtoError> {
    let Ok(v) = std::env::var("RTO_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| RtoError::Config { key: "RTO_THREADS".into(), msg: format!("not a thread count: {v}") })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| RtoError::Config { key: "RTO_THREADS".into(), msg: e.to_string() })
}

fn load(cli: &Cli, path: &PathBuf) -> Result<RunConfig, RtoError> {
    let mut cfg = RunConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<i32, RtoError> {
    threads()?;
    match &cli.command {
        Command::Optimize { config } => {
            let cfg = load(cli, config)?;
            let out = io::optimize(&cfg)?;
            let r = &out.result;
            let b = &r.bounds;
            println!("status {:?} after {} iterations", r.status, r.state.iter);
            println!("J [{}, {}]", b.objective.lo, b.objective.hi);
            println!("mu [{}, {}]  sigma [{}, {}]", b.mean.lo, b.mean.hi, b.std_dev.lo, b.std_dev.hi);
            println!("wrote {}", cfg.output.dir.display());
            Ok(if r.status.converged() { io::EXIT_OK } else { io::EXIT_NOT_CONVERGED })
        }
        Command::Bounds { config, design } => {
            let cfg = load(cli, config)?;
            let out = io::bounds(&cfg, design.as_deref())?;
            print!("{}", toml::to_string(&out.bounds).unwrap_or_default());
            Ok(io::EXIT_OK)
        }
        Command::Field { config, count } => {
            let cfg = load(cli, config)?;
            let out = io::field(&cfg, *count)?;
            println!("K-L order {} captures {:.4} of the field variance", out.order, out.energy_fraction);
            println!("wrote {}", cfg.output.dir.display());
            Ok(io::EXIT_OK)
        }
        Command::Monotonicity { config, design, points } => {
            let cfg = load(cli, config)?;
            let out = io::monotonicity(&cfg, design.as_deref(), *points)?;
            for e in &out.report.entries {
                println!("{:?} -> {}: {:?}", e.input, e.output, e.sign);
            }
            Ok(io::EXIT_OK)
        }
        Command::Verify { config, design } => {
            let cfg = load(cli, config)?;
            let r = io::verify(&cfg, design.as_deref())?.report;
            println!(
                "{} samples, K-L order {} vs {}: KS distance {:.4} (limit {}), relative error {:.4} (limit {})",
                r.samples,
                r.order,
                r.direct_order,
                r.ks_distance,
                VerifyReport::KS_LIMIT,
                r.relative_error,
                VerifyReport::ERROR_LIMIT
            );
            Ok(if r.passed() { io::EXIT_OK } else { io::EXIT_VERIFY_FAILED })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
