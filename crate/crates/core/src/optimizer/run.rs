use serde::{Deserialize, Serialize};

use super::convergence::{convergence_check, ConvergenceRule, ConvergenceStatus, HistoryRecord};
use super::mma::MmaState;
use super::periodic::PeriodicLayout;
use crate::bounds::{ca_bounds, pso_bounds, qmcs_bounds, MomentBounds, SwarmConfig};
use crate::fem::{
    assemble_and_factor, build_load_cases, compliance_matrix, lump_line_load, solve_cases, ComplianceMatrix,
    LoadCaseSet, Mesh, SimpParams, SolverKind,
};
use crate::filter::{filter_chain_sensitivity, filter_transpose, heaviside_project, linear_filter, AlphaSchedule, FilterState};
use crate::moments::{ObjectiveParams, VarianceMode};
use crate::random_field::{KLBasis, PBox};
use crate::sensitivity::{corner_sensitivity, interval_sensitivity};
use crate::{Result, RtoError};

/// Engine used for the per-iteration bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BoundEngine {
    Ca,
    Qmcs { n_points: usize },
    Pso(SwarmConfig),
}

impl Default for BoundEngine {
    fn default() -> Self {
        BoundEngine::Ca
    }
}

impl BoundEngine {
    pub fn evaluate(
        &self,
        c_ref: &ComplianceMatrix,
        reference: (f64, f64),
        pbox: &PBox,
        beta: f64,
        mode: VarianceMode,
    ) -> Result<MomentBounds> {
        let (mu_ref, sigma_ref) = reference;
        match self {
            BoundEngine::Ca => ca_bounds(c_ref, mu_ref, sigma_ref, pbox, beta, mode),
            BoundEngine::Qmcs { n_points } => qmcs_bounds(c_ref, mu_ref, sigma_ref, pbox, beta, *n_points, mode),
            BoundEngine::Pso(cfg) => pso_bounds(c_ref, mu_ref, sigma_ref, pbox, beta, cfg, mode),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    pub volfrac: f64,
    pub tol_change: f64,
    pub max_iter: usize,
    pub move_limit: f64,
    /// Reject steps whose true objective exceeds the approximation and
    /// retry with more curvature.
    pub conservative: bool,
    pub solver: SolverKind,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            volfrac: 0.3,
            tol_change: 0.01,
            max_iter: 200,
            move_limit: 0.2,
            conservative: false,
            solver: SolverKind::Auto,
        }
    }
}

/// Everything one optimization run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub mesh: Mesh,
    pub simp: SimpParams,
    pub filter_radius: f64,
    pub alpha: AlphaSchedule,
    pub pbox: PBox,
    /// `None` keeps only the mean load case.
    pub basis: Option<KLBasis>,
    pub objective: ObjectiveParams,
    pub mode: VarianceMode,
    pub engine: BoundEngine,
    pub settings: OptimizerSettings,
    pub periodic: Option<PeriodicLayout>,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        self.simp.validate()?;
        self.pbox.validate()?;
        self.objective.validate()?;
        self.alpha.validate()?;
        let s = &self.settings;
        if !(s.volfrac > 0.0 && s.volfrac <= 1.0) {
            return Err(RtoError::InvalidInput(format!("volume fraction {} outside (0, 1]", s.volfrac)));
        }
        if !(s.tol_change > 0.0) || s.max_iter == 0 || !(s.move_limit > 0.0 && s.move_limit <= 1.0) {
            return Err(RtoError::InvalidInput("optimizer needs tol_change > 0, max_iter >= 1, move limit in (0, 1]".into()));
        }
        if !(self.filter_radius > 0.0) {
            return Err(RtoError::InvalidInput(format!("filter radius {} must be positive", self.filter_radius)));
        }
        if let Some(layout) = &self.periodic {
            layout.check(self.mesh.nx, self.mesh.ny)?;
        }
        Ok(())
    }

    /// The deterministic counterpart: mean load only, `β = 0`, the p-box
    /// collapsed to its midpoint.
    pub fn deterministic(&self) -> Result<Problem> {
        let (mu, sigma) = reference_point(&self.pbox);
        Ok(Problem {
            basis: None,
            pbox: PBox::point(mu, sigma)?,
            objective: ObjectiveParams { beta: 0.0, w1: 1.0, w2: 0.0 },
            engine: BoundEngine::Ca,
            ..self.clone()
        })
    }
}

/// `(μ_ref, σ_ref)`: interval midpoints, moved off zero when needed.
pub fn reference_point(pbox: &PBox) -> (f64, f64) {
    let mut mu = pbox.mu_mid();
    if mu == 0.0 {
        mu = if pbox.mu_hi.abs() >= pbox.mu_lo.abs() { pbox.mu_hi } else { pbox.mu_lo };
    }
    if mu == 0.0 {
        mu = 1.0;
    }
    let mut sigma = pbox.sigma_mid();
    if sigma == 0.0 {
        sigma = 1.0;
    }
    (mu, sigma)
}

/// Superposition load cases at the reference parameters.
pub fn reference_load_cases(problem: &Problem, reference: (f64, f64)) -> Result<LoadCaseSet> {
    let (mu_ref, sigma_ref) = reference;
    match &problem.basis {
        Some(basis) => build_load_cases(&problem.mesh, basis, mu_ref, sigma_ref),
        None => {
            let n = problem.mesh.load_edge.nodes.len();
            Ok(LoadCaseSet {
                cases: vec![lump_line_load(&problem.mesh, &vec![mu_ref; n])?],
                mu_ref,
                sigma_ref,
            })
        }
    }
}

/// Finite element state of one physical design.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub disps: Vec<Vec<f64>>,
    pub c_ref: ComplianceMatrix,
    pub bounds: MomentBounds,
}

fn analyze(problem: &Problem, loads: &LoadCaseSet, reference: (f64, f64), rho_phys: &[f64]) -> Result<Analysis> {
    let k = assemble_and_factor(&problem.mesh, rho_phys, &problem.simp, problem.settings.solver)?;
    let disps = solve_cases(&k, loads)?;
    let c_ref = compliance_matrix(loads, &disps)?;
    let bounds = problem
        .engine
        .evaluate(&c_ref, reference, &problem.pbox, problem.objective.beta, problem.mode)?;
    Ok(Analysis { disps, c_ref, bounds })
}

/// Finite element analysis of a fixed physical design at the reference point.
pub fn analyze_design(problem: &Problem, rho_phys: &[f64]) -> Result<Analysis> {
    problem.validate()?;
    let reference = reference_point(&problem.pbox);
    let loads = reference_load_cases(problem, reference)?;
    analyze(problem, &loads, reference, rho_phys)
}

/// Bounds of a fixed physical design under the problem's p-box.
pub fn evaluate_design(problem: &Problem, rho_phys: &[f64]) -> Result<MomentBounds> {
    Ok(analyze_design(problem, rho_phys)?.bounds)
}

/// Densities of the current design, all over the full mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignState {
    pub rho: Vec<f64>,
    pub rho_bar: Vec<f64>,
    pub rho_phys: Vec<f64>,
    pub iter: usize,
    pub history: Vec<HistoryRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    Stalled,
    MaxIterations,
}

impl RunStatus {
    pub fn converged(&self) -> bool {
        *self == RunStatus::Converged
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: DesignState,
    pub bounds: MomentBounds,
    pub status: RunStatus,
    pub reference: (f64, f64),
    pub alpha: f64,
    pub eta: f64,
    /// Iterations whose objective arg-corners differed from the previous one.
    pub corner_switches: usize,
}

/// What the per-iteration callback sees.
#[derive(Debug)]
pub struct IterationReport<'a> {
    pub record: &'a HistoryRecord,
    pub bounds: &'a MomentBounds,
    pub rho_phys: &'a [f64],
    pub alpha: f64,
    pub eta: f64,
}

struct Physical {
    rho_bar: Vec<f64>,
    eta: f64,
    full_bar: Vec<f64>,
    full_phys: Vec<f64>,
}

struct Pipeline<'a> {
    problem: &'a Problem,
    filter: FilterState,
    loads: LoadCaseSet,
    reference: (f64, f64),
}

impl Pipeline<'_> {
    fn tile(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.problem.periodic {
            Some(l) => l.expand(x),
            None => Ok(x.to_vec()),
        }
    }

    fn physical(&self, rho: &[f64], alpha: f64) -> Result<Physical> {
        let rho_bar = linear_filter(rho, &self.filter)?;
        let (rho_phys, eta) = heaviside_project(&rho_bar, alpha)?;
        Ok(Physical {
            full_bar: self.tile(&rho_bar)?,
            full_phys: self.tile(&rho_phys)?,
            rho_bar,
            eta,
        })
    }

    fn weighted(&self, b: &MomentBounds) -> f64 {
        let o = &self.problem.objective;
        o.w1 * b.objective.hi + o.w2 * b.objective.lo
    }

    /// `d(w1 J̄ + w2 J̲)/dρ` on the design variables.
    fn gradient(&self, an: &Analysis, phys: &Physical, alpha: f64) -> Result<Vec<f64>> {
        let p = self.problem;
        let o = &p.objective;
        let sens = |corner| {
            corner_sensitivity(
                &an.disps,
                &an.c_ref,
                self.reference,
                corner,
                o.beta,
                p.mode,
                &phys.full_phys,
                &p.simp,
                &p.mesh,
            )
        };
        let upper = sens(an.bounds.objective.arg_hi)?;
        let lower = if o.w2 > 0.0 { sens(an.bounds.objective.arg_lo)? } else { upper.clone() };
        let combined = interval_sensitivity(&upper, &lower, o.w1, o.w2)?;
        let on_design = match &p.periodic {
            Some(l) => l.reduce(&combined.values)?,
            None => combined.values,
        };
        filter_chain_sensitivity(&on_design, &self.filter, &phys.rho_bar, alpha, phys.eta)
    }
}

/// Runs the optimization loop without observing iterations.
pub fn run_rto(problem: &Problem) -> Result<RunResult> {
    run_rto_with(problem, |_| {})
}

/// Runs the optimization loop, calling `on_iter` after every iteration.
pub fn run_rto_with(problem: &Problem, mut on_iter: impl FnMut(&IterationReport)) -> Result<RunResult> {
    problem.validate()?;
    let mesh = &problem.mesh;
    let h = mesh.elem_size;
    let filter = match &problem.periodic {
        Some(l) => FilterState::periodic(l.cell_nx, l.cell_ny, h, problem.filter_radius)?,
        None => FilterState::new(mesh.nx, mesh.ny, h, problem.filter_radius)?,
    };
    let reference = reference_point(&problem.pbox);
    let loads = reference_load_cases(problem, reference)?;
    let pipe = Pipeline {
        problem,
        filter,
        loads,
        reference,
    };
    let settings = &problem.settings;
    let n = pipe.filter.len();
    let rule = ConvergenceRule::new(settings.tol_change, settings.volfrac);

    let mut rho = vec![settings.volfrac; n];
    let mut mma = MmaState::new(n, settings.move_limit);
    let mut history: Vec<HistoryRecord> = Vec::new();
    let mut corner_switches = 0;
    let mut last_corners: Option<((f64, f64), (f64, f64))> = None;
    let dg = filter_transpose(&vec![1.0 / n as f64; n], &pipe.filter)?;
    let mut cached: Option<(Vec<f64>, f64, Physical, Analysis)> = None;

    for iter in 1..=settings.max_iter {
        let alpha = problem.alpha.alpha(iter);
        let (phys, an) = match cached.take() {
            Some((x, a, p, an)) if x == rho && a == alpha => (p, an),
            _ => {
                let p = pipe.physical(&rho, alpha)?;
                let an = analyze(problem, &pipe.loads, reference, &p.full_phys)?;
                (p, an)
            }
        };
        let corners = (an.bounds.objective.arg_lo, an.bounds.objective.arg_hi);
        if last_corners.is_some_and(|c| c != corners) {
            corner_switches += 1;
            log::debug!("iteration {iter}: objective corners moved to {corners:?}");
        }
        last_corners = Some(corners);

        let df = pipe.gradient(&an, &phys, alpha)?;
        let volfrac = phys.rho_bar.iter().sum::<f64>() / n as f64;
        let g = volfrac - settings.volfrac;

        mma.update_asymptotes(&rho);
        let mut raa0 = mma.raa0;
        let mut sub = mma.subproblem(&rho, &df, g, &dg, raa0)?;
        let (mut next, _) = sub.solve()?;
        if settings.conservative {
            let f_now = pipe.weighted(&an.bounds);
            for _ in 0..5 {
                let p = pipe.physical(&next, alpha)?;
                let trial = analyze(problem, &pipe.loads, reference, &p.full_phys)?;
                let f_true = pipe.weighted(&trial.bounds);
                let f_approx = f_now + sub.objective_change(&next);
                cached = Some((next.clone(), alpha, p, trial));
                if f_true <= f_approx + 1e-10 * f_now.abs() {
                    break;
                }
                let d: f64 = next
                    .iter()
                    .zip(&rho)
                    .enumerate()
                    .map(|(j, (x, x0))| {
                        let (l, u) = (sub.low[j], sub.upp[j]);
                        (u - l) * (x - x0).powi(2) / ((u - x) * (x - l))
                    })
                    .sum();
                if !(d > 0.0) {
                    break;
                }
                raa0 = (1.1 * (raa0 + (f_true - f_approx) / d)).min(10.0 * raa0);
                sub = mma.subproblem(&rho, &df, g, &dg, raa0)?;
                next = sub.solve()?.0;
            }
        }
        mma.commit(&rho);

        let max_change = next
            .iter()
            .zip(&rho)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let b = &an.bounds;
        let record = HistoryRecord {
            iter,
            j_lo: b.objective.lo,
            j_hi: b.objective.hi,
            mu_lo: b.mean.lo,
            mu_hi: b.mean.hi,
            sigma_lo: b.std_dev.lo,
            sigma_hi: b.std_dev.hi,
            volfrac,
            max_change,
        };
        history.push(record);
        on_iter(&IterationReport {
            record: &record,
            bounds: b,
            rho_phys: &phys.full_phys,
            alpha,
            eta: phys.eta,
        });
        log::info!(
            "iter {iter:4}  J [{:.6}, {:.6}]  vol {:.4}  change {:.4}  alpha {alpha}",
            record.j_lo,
            record.j_hi,
            volfrac,
            max_change
        );

        let status = match convergence_check(&history, &rule) {
            ConvergenceStatus::Converged => Some(RunStatus::Converged),
            ConvergenceStatus::Stalled => Some(RunStatus::Stalled),
            ConvergenceStatus::Continue if iter == settings.max_iter => Some(RunStatus::MaxIterations),
            ConvergenceStatus::Continue => None,
        };
        if let Some(status) = status {
            return Ok(RunResult {
                state: DesignState {
                    rho: pipe.tile(&rho)?,
                    rho_bar: phys.full_bar,
                    rho_phys: phys.full_phys,
                    iter,
                    history,
                },
                bounds: an.bounds,
                status,
                reference,
                alpha,
                eta: phys.eta,
                corner_switches,
            });
        }
        rho = next;
    }
    unreachable!("the loop returns at max_iter")
}
