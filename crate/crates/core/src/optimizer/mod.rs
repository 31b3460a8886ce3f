//! MMA density updates, periodic layouts and the optimization loop.

mod convergence;
mod mma;
mod periodic;
mod run;

pub use convergence::{convergence_check, ConvergenceRule, ConvergenceStatus, HistoryRecord};
pub use mma::{mma_update, MmaState, MmaSubproblem};
pub use periodic::PeriodicLayout;
pub use run::{
    analyze_design, evaluate_design, reference_load_cases, reference_point, run_rto, run_rto_with, Analysis, BoundEngine,
    DesignState, IterationReport, OptimizerSettings, Problem, RunResult, RunStatus,
};
