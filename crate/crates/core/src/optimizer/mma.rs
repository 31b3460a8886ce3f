use crate::{Result, RtoError};

/// Moving-asymptote state for box-constrained variables in `[0, 1]` with
/// one inequality constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct MmaState {
    pub low: Vec<f64>,
    pub upp: Vec<f64>,
    pub xold1: Vec<f64>,
    pub xold2: Vec<f64>,
    pub iter: usize,
    pub move_limit: f64,
    pub asyinit: f64,
    pub asyincr: f64,
    pub asydecr: f64,
    /// Curvature floor added to the objective approximation.
    pub raa0: f64,
}

const XMIN: f64 = 0.0;
const XMAX: f64 = 1.0;
const RANGE: f64 = XMAX - XMIN;

impl MmaState {
    pub fn new(n: usize, move_limit: f64) -> Self {
        MmaState {
            low: vec![XMIN; n],
            upp: vec![XMAX; n],
            xold1: Vec::new(),
            xold2: Vec::new(),
            iter: 0,
            move_limit,
            asyinit: 0.5,
            asyincr: 1.2,
            asydecr: 0.7,
            raa0: 1e-5,
        }
    }

    /// Moves the asymptotes for the current iterate `x`.
    pub fn update_asymptotes(&mut self, x: &[f64]) {
        self.iter += 1;
        if self.iter <= 2 || self.xold2.len() != x.len() {
            for j in 0..x.len() {
                self.low[j] = x[j] - self.asyinit * RANGE;
                self.upp[j] = x[j] + self.asyinit * RANGE;
            }
            return;
        }
        for j in 0..x.len() {
            let sign = (x[j] - self.xold1[j]) * (self.xold1[j] - self.xold2[j]);
            let gamma = if sign < 0.0 {
                self.asydecr
            } else if sign > 0.0 {
                self.asyincr
            } else {
                1.0
            };
            let low = x[j] - gamma * (self.xold1[j] - self.low[j]);
            let upp = x[j] + gamma * (self.upp[j] - self.xold1[j]);
            self.low[j] = low.clamp(x[j] - 10.0 * RANGE, x[j] - 0.01 * RANGE);
            self.upp[j] = upp.clamp(x[j] + 0.01 * RANGE, x[j] + 10.0 * RANGE);
        }
    }

    /// Separable convex approximation around `x`.
    pub fn subproblem(&self, x: &[f64], df: &[f64], g: f64, dg: &[f64], raa0: f64) -> Result<MmaSubproblem> {
        let n = x.len();
        if df.len() != n || dg.len() != n {
            return Err(RtoError::InvalidInput("gradient length does not match the design".into()));
        }
        if df.iter().chain(dg).any(|v| !v.is_finite()) || !g.is_finite() {
            return Err(RtoError::Numerical("non-finite gradient passed to MMA".into()));
        }
        let mut sub = MmaSubproblem {
            x0: x.to_vec(),
            low: self.low.clone(),
            upp: self.upp.clone(),
            alpha: vec![0.0; n],
            beta: vec![0.0; n],
            p0: vec![0.0; n],
            q0: vec![0.0; n],
            p1: vec![0.0; n],
            q1: vec![0.0; n],
            r1: g,
        };
        for j in 0..n {
            let (l, u) = (self.low[j], self.upp[j]);
            sub.alpha[j] = XMIN.max(l + 0.1 * (x[j] - l)).max(x[j] - self.move_limit * RANGE);
            sub.beta[j] = XMAX.min(u - 0.1 * (u - x[j])).min(x[j] + self.move_limit * RANGE);
            let (ux2, xl2) = ((u - x[j]).powi(2), (x[j] - l).powi(2));
            let damp = raa0 / RANGE;
            sub.p0[j] = ux2 * (1.001 * df[j].max(0.0) + 0.001 * (-df[j]).max(0.0) + damp);
            sub.q0[j] = xl2 * (0.001 * df[j].max(0.0) + 1.001 * (-df[j]).max(0.0) + damp);
            sub.p1[j] = ux2 * (1.001 * dg[j].max(0.0) + 0.001 * (-dg[j]).max(0.0) + 1e-5 / RANGE);
            sub.q1[j] = xl2 * (0.001 * dg[j].max(0.0) + 1.001 * (-dg[j]).max(0.0) + 1e-5 / RANGE);
            sub.r1 -= sub.p1[j] / (u - x[j]) + sub.q1[j] / (x[j] - l);
        }
        Ok(sub)
    }

    /// Shifts the iterate history after `x` has been used.
    pub fn commit(&mut self, x: &[f64]) {
        self.xold2 = std::mem::take(&mut self.xold1);
        self.xold1 = x.to_vec();
    }
}

/// `min Σ p0/(U-x) + q0/(x-L)` subject to
/// `r1 + Σ p1/(U-x) + q1/(x-L) ≤ 0` and `alpha ≤ x ≤ beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct MmaSubproblem {
    pub x0: Vec<f64>,
    pub low: Vec<f64>,
    pub upp: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub p0: Vec<f64>,
    pub q0: Vec<f64>,
    pub p1: Vec<f64>,
    pub q1: Vec<f64>,
    pub r1: f64,
}

impl MmaSubproblem {
    fn primal(&self, lam: f64) -> Vec<f64> {
        (0..self.x0.len())
            .map(|j| {
                let p = (self.p0[j] + lam * self.p1[j]).sqrt();
                let q = (self.q0[j] + lam * self.q1[j]).sqrt();
                let x = (p * self.low[j] + q * self.upp[j]) / (p + q);
                x.clamp(self.alpha[j], self.beta[j])
            })
            .collect()
    }

    pub fn constraint(&self, x: &[f64]) -> f64 {
        self.r1
            + x.iter()
                .enumerate()
                .map(|(j, &xj)| self.p1[j] / (self.upp[j] - xj) + self.q1[j] / (xj - self.low[j]))
                .sum::<f64>()
    }

    /// Approximate objective change from `x0` to `x`.
    pub fn objective_change(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(j, &xj)| {
                let x0 = self.x0[j];
                self.p0[j] / (self.upp[j] - xj) + self.q0[j] / (xj - self.low[j])
                    - self.p0[j] / (self.upp[j] - x0)
                    - self.q0[j] / (x0 - self.low[j])
            })
            .sum()
    }

    /// Dual bisection on the constraint multiplier.
    pub fn solve(&self) -> Result<(Vec<f64>, f64)> {
        let x = self.primal(0.0);
        if self.constraint(&x) <= 0.0 {
            return Ok((x, 0.0));
        }
        let mut hi = 1.0;
        let mut grown = 0;
        while self.constraint(&self.primal(hi)) > 0.0 {
            hi *= 10.0;
            grown += 1;
            if grown > 60 {
                // the box itself is infeasible; take the most feasible point
                let x = self.primal(hi);
                log::warn!("MMA subproblem infeasible within move limits (g = {:e})", self.constraint(&x));
                return Ok((x, hi));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.constraint(&self.primal(mid)) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        let x = self.primal(hi);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(RtoError::Numerical("MMA dual bisection produced a non-finite design".into()));
        }
        Ok((x, hi))
    }
}

/// One MMA step from `x` for objective gradient `df` and constraint value
/// `g` with gradient `dg`.
pub fn mma_update(state: &mut MmaState, x: &[f64], df: &[f64], g: f64, dg: &[f64]) -> Result<Vec<f64>> {
    state.update_asymptotes(x);
    let sub = state.subproblem(x, df, g, dg, state.raa0)?;
    let (xn, _) = sub.solve()?;
    state.commit(x);
    Ok(xn)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_to_constrained_quadratic_minimum() {
        let n = 50;
        let mut x = vec![1.0; n];
        let mut st = MmaState::new(n, 0.2);
        let dg = vec![1.0 / n as f64; n];
        for _ in 0..30 {
            let df: Vec<f64> = x.iter().map(|v| 2.0 * (v - 0.5)).collect();
            let g = x.iter().sum::<f64>() / n as f64 - 0.5;
            x = mma_update(&mut st, &x, &df, g, &dg).unwrap();
        }
        assert!(x.iter().all(|v| (v - 0.5).abs() < 1e-4), "{x:?}");
    }

    #[test]
    fn respects_move_limit_and_box() {
        let n = 20;
        let x: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        let mut st = MmaState::new(n, 0.2);
        let df: Vec<f64> = (0..n).map(|k| if k % 2 == 0 { -5.0 } else { 3.0 }).collect();
        let dg = vec![1.0 / n as f64; n];
        let g = x.iter().sum::<f64>() / n as f64 - 0.9;
        let xn = mma_update(&mut st, &x, &df, g, &dg).unwrap();
        for (a, b) in x.iter().zip(&xn) {
            assert!(*b >= (a - 0.2).max(0.0) - 1e-15 && *b <= (a + 0.2).min(1.0) + 1e-15);
        }
    }

    #[test]
    fn stationary_point_stays() {
        // minimize Σ -x s.t. mean(x) <= 0.4: uniform 0.4 is optimal
        let n = 10;
        let x = vec![0.4; n];
        let mut st = MmaState::new(n, 0.2);
        let df = vec![-1.0; n];
        let dg = vec![1.0 / n as f64; n];
        let xn = mma_update(&mut st, &x, &df, 0.0, &dg).unwrap();
        for v in xn {
            assert!((v - 0.4).abs() < 1e-3, "{v}");
        }
    }

    #[test]
    fn asymptotes_bracket_iterate() {
        let n = 5;
        let mut st = MmaState::new(n, 0.2);
        let mut x = vec![0.3; n];
        let dg = vec![0.2; n];
        for k in 0..6 {
            let df: Vec<f64> = (0..n).map(|j| if (j + k) % 2 == 0 { 1.0 } else { -1.0 }).collect();
            st.update_asymptotes(&x);
            for j in 0..n {
                assert!(st.low[j] < x[j] && x[j] < st.upp[j]);
            }
            let sub = st.subproblem(&x, &df, x.iter().sum::<f64>() * 0.2 - 0.3, &dg, st.raa0).unwrap();
            let (xn, _) = sub.solve().unwrap();
            st.commit(&x);
            x = xn;
        }
    }

    #[test]
    fn rejects_nan_gradient() {
        let mut st = MmaState::new(2, 0.2);
        assert!(mma_update(&mut st, &[0.5, 0.5], &[f64::NAN, 0.0], 0.0, &[0.5, 0.5]).is_err());
    }
}
