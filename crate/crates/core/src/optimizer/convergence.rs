use serde::{Deserialize, Serialize};

/// One optimization iteration as written to the history file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub iter: usize,
    pub j_lo: f64,
    pub j_hi: f64,
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    /// Volume fraction of the projected densities.
    pub volfrac: f64,
    /// Largest design change produced by this iteration's update.
    pub max_change: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    Converged,
    Continue,
    Stalled,
}

/// Stopping rule settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRule {
    pub tol_change: f64,
    pub volfrac: f64,
    /// Iterations the objective bounds must stay flat to count as stalled.
    pub stall_window: usize,
    pub stall_tol: f64,
}

impl ConvergenceRule {
    pub fn new(tol_change: f64, volfrac: f64) -> Self {
        ConvergenceRule {
            tol_change,
            volfrac,
            stall_window: 20,
            stall_tol: 1e-6,
        }
    }
}

pub fn convergence_check(history: &[HistoryRecord], rule: &ConvergenceRule) -> ConvergenceStatus {
    let Some(last) = history.last() else {
        return ConvergenceStatus::Continue;
    };
    if history.len() < 2 {
        return ConvergenceStatus::Continue;
    }
    if last.max_change < rule.tol_change && last.volfrac <= rule.volfrac + 1e-6 {
        return ConvergenceStatus::Converged;
    }
    if history.len() >= rule.stall_window {
        let tail = &history[history.len() - rule.stall_window..];
        let flat = |f: fn(&HistoryRecord) -> f64| {
            let (lo, hi) = tail
                .iter()
                .map(f)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            hi - lo <= rule.stall_tol * hi.abs().max(lo.abs()).max(1e-300)
        };
        if flat(|r| r.j_lo) && flat(|r| r.j_hi) {
            return ConvergenceStatus::Stalled;
        }
    }
    ConvergenceStatus::Continue
}
