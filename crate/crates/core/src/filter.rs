//! Linear density filter, volume-preserving smoothed Heaviside projection
//! and the chain rule back to the design variables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Result, RtoError};

/// Cone-weighted neighborhoods on a regular grid of `nx × ny` elements.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub radius: f64,
    pub nx: usize,
    pub ny: usize,
    pub periodic: bool,
    /// `(neighbor, R - distance)` for every element.
    pub neighbors: Vec<Vec<(usize, f64)>>,
    pub weight_sums: Vec<f64>,
}

impl FilterState {
    /// Truncated neighborhoods near the grid boundary.
    pub fn new(nx: usize, ny: usize, elem_size: f64, radius: f64) -> Result<Self> {
        Self::build(nx, ny, elem_size, radius, false)
    }

    /// Neighborhoods wrap around, as on a torus.
    pub fn periodic(nx: usize, ny: usize, elem_size: f64, radius: f64) -> Result<Self> {
        Self::build(nx, ny, elem_size, radius, true)
    }

    fn build(nx: usize, ny: usize, elem_size: f64, radius: f64, periodic: bool) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(RtoError::InvalidInput("filter grid must be non-empty".into()));
        }
        if !(radius > 0.0 && elem_size > 0.0) {
            return Err(RtoError::InvalidInput(format!(
                "filter radius and element size must be positive (got {radius}, {elem_size})"
            )));
        }
        let reach = (radius / elem_size).ceil() as i64;
        let neighbors: Vec<Vec<(usize, f64)>> = (0..nx * ny)
            .into_par_iter()
            .map(|e| {
                let (row, col) = ((e / nx) as i64, (e % nx) as i64);
                let mut list: Vec<(usize, f64)> = Vec::new();
                for dr in -reach..=reach {
                    for dc in -reach..=reach {
                        let dist = elem_size * ((dr * dr + dc * dc) as f64).sqrt();
                        let w = radius - dist;
                        if w <= 0.0 {
                            continue;
                        }
                        let (r, c) = (row + dr, col + dc);
                        let idx = if periodic {
                            let r = r.rem_euclid(ny as i64) as usize;
                            let c = c.rem_euclid(nx as i64) as usize;
                            r * nx + c
                        } else {
                            if r < 0 || c < 0 || r >= ny as i64 || c >= nx as i64 {
                                continue;
                            }
                            r as usize * nx + c as usize
                        };
                        list.push((idx, w));
                    }
                }
                list.sort_by_key(|p| p.0);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(list.len());
                for (i, w) in list {
                    match merged.last_mut() {
                        Some(last) if last.0 == i => last.1 += w,
                        _ => merged.push((i, w)),
                    }
                }
                merged
            })
            .collect();
        let weight_sums = neighbors.iter().map(|n| n.iter().map(|p| p.1).sum()).collect();
        Ok(FilterState {
            radius,
            nx,
            ny,
            periodic,
            neighbors,
            weight_sums,
        })
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// `ρ̄_e = Σ w ρ / Σ w` over each neighborhood.
pub fn linear_filter(rho: &[f64], state: &FilterState) -> Result<Vec<f64>> {
    if rho.len() != state.len() {
        return Err(RtoError::InvalidInput(format!(
            "{} densities for a filter over {} elements",
            rho.len(),
            state.len()
        )));
    }
    Ok(state
        .neighbors
        .par_iter()
        .zip(&state.weight_sums)
        .map(|(nb, s)| nb.iter().map(|&(i, w)| w * rho[i]).sum::<f64>() / s)
        .collect())
}

/// Transpose of [`linear_filter`].
pub fn filter_transpose(g: &[f64], state: &FilterState) -> Result<Vec<f64>> {
    if g.len() != state.len() {
        return Err(RtoError::InvalidInput(format!(
            "{} entries for a filter over {} elements",
            g.len(),
            state.len()
        )));
    }
    // weights are symmetric, so the transpose reuses each element's own list
    Ok(state
        .neighbors
        .par_iter()
        .map(|nb| nb.iter().map(|&(i, w)| w * g[i] / state.weight_sums[i]).sum())
        .collect())
}

/// Smoothed Heaviside step with threshold `eta` and sharpness `alpha`.
pub fn heaviside(rho_bar: f64, alpha: f64, eta: f64) -> f64 {
    let ea = (-alpha).exp();
    if rho_bar <= eta {
        if eta <= 0.0 {
            return 0.0;
        }
        let t = 1.0 - rho_bar / eta;
        eta * ((-alpha * t).exp() - t * ea)
    } else {
        let t = (rho_bar - eta) / (1.0 - eta);
        (1.0 - eta) * (1.0 - (-alpha * t).exp() + t * ea) + eta
    }
}

/// `d heaviside / d rho_bar` at fixed `eta`.
pub fn heaviside_derivative(rho_bar: f64, alpha: f64, eta: f64) -> f64 {
    let ea = (-alpha).exp();
    if rho_bar <= eta {
        if eta <= 0.0 {
            return alpha + ea;
        }
        alpha * (-alpha * (1.0 - rho_bar / eta)).exp() + ea
    } else {
        alpha * (-alpha * (rho_bar - eta) / (1.0 - eta)).exp() + ea
    }
}

pub fn project_with_eta(rho_bar: &[f64], alpha: f64, eta: f64) -> Vec<f64> {
    rho_bar.iter().map(|&r| heaviside(r, alpha, eta).clamp(0.0, 1.0)).collect()
}

/// Projected densities and the threshold `η` that keeps `Σ ρ̃ = Σ ρ̄`.
pub fn heaviside_project(rho_bar: &[f64], alpha: f64) -> Result<(Vec<f64>, f64)> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(RtoError::InvalidInput(format!("Heaviside sharpness must be >= 0, got {alpha}")));
    }
    if let Some(r) = rho_bar.iter().find(|r| !(**r >= 0.0 && **r <= 1.0)) {
        return Err(RtoError::InvalidInput(format!("filtered density {r} outside [0, 1]")));
    }
    let target: f64 = rho_bar.iter().sum();
    let volume = |eta: f64| -> f64 { rho_bar.iter().map(|&r| heaviside(r, alpha, eta)).sum() };
    // projected volume falls as eta grows
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (v_lo, v_hi) = (volume(lo), volume(hi));
    let tol = 1e-10 * target.max(1.0);
    if v_lo < target - tol || v_hi > target + tol {
        return Err(RtoError::Numerical(format!(
            "threshold bracket failed: volume {v_lo}..{v_hi} does not straddle {target}"
        )));
    }
    let mut eta = 0.5;
    for _ in 0..200 {
        eta = 0.5 * (lo + hi);
        let v = volume(eta);
        if (v - target).abs() <= 1e-13 * target.max(1.0) {
            break;
        }
        if v > target {
            lo = eta;
        } else {
            hi = eta;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let rho_phys = project_with_eta(rho_bar, alpha, eta);
    let got: f64 = rho_phys.iter().sum();
    if (got - target).abs() > tol {
        return Err(RtoError::Numerical(format!(
            "volume-preserving threshold missed: {got} vs {target}"
        )));
    }
    Ok((rho_phys, eta))
}

/// Maps `dJ/dρ̃` back to `dJ/dρ` through the projection (η held fixed) and
/// the linear filter.
pub fn filter_chain_sensitivity(
    dj_drho_phys: &[f64],
    state: &FilterState,
    rho_bar: &[f64],
    alpha: f64,
    eta: f64,
) -> Result<Vec<f64>> {
    if dj_drho_phys.len() != rho_bar.len() {
        return Err(RtoError::InvalidInput("sensitivity and density lengths differ".into()));
    }
    let g: Vec<f64> = dj_drho_phys
        .iter()
        .zip(rho_bar)
        .map(|(d, &r)| d * heaviside_derivative(r, alpha, eta))
        .collect();
    filter_transpose(&g, state)
}

/// Sharpness `start` for the first `every` iterations, then multiplied by
/// `factor` every `every` iterations up to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlphaSchedule {
    pub start: f64,
    pub every: usize,
    pub factor: f64,
    pub max: f64,
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        AlphaSchedule {
            start: 1.0,
            every: 30,
            factor: 2.0,
            max: 64.0,
        }
    }
}

impl AlphaSchedule {
    /// Sharpness at 1-based iteration `iter`.
    pub fn alpha(&self, iter: usize) -> f64 {
        let steps = (iter.max(1) - 1) / self.every.max(1);
        let mut a = self.start;
        for _ in 0..steps {
            a *= self.factor;
            if a >= self.max {
                return self.max;
            }
        }
        a.min(self.max)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start >= 0.0 && self.factor >= 1.0 && self.max >= self.start && self.every >= 1) {
            return Err(RtoError::InvalidInput(format!("invalid sharpness schedule {self:?}")));
        }
        Ok(())
    }
}
