use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{map_to_box, Engine, Interval, MomentBounds, ScaledMoments, Sobol2};
use crate::fem::ComplianceMatrix;
use crate::moments::VarianceMode;
use crate::random_field::PBox;
use crate::{Result, RtoError};

/// Particle swarm settings. Inertia falls linearly from `w_start` to `w_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwarmConfig {
    pub n_particles: usize,
    pub n_iters: usize,
    pub c1: f64,
    pub c2: f64,
    pub w_start: f64,
    pub w_end: f64,
    pub seed: u64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            n_particles: 20,
            n_iters: 100,
            c1: 2.0,
            c2: 2.0,
            w_start: 0.9,
            w_end: 0.4,
            seed: 0,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(RtoError::InvalidInput(format!(
                "swarm needs at least 2 particles, got {}",
                self.n_particles
            )));
        }
        let finite = [self.c1, self.c2, self.w_start, self.w_end].iter().all(|v| v.is_finite() && *v >= 0.0);
        if !finite {
            return Err(RtoError::InvalidInput("swarm coefficients must be finite and non-negative".into()));
        }
        Ok(())
    }

    fn inertia(&self, it: usize) -> f64 {
        if self.n_iters <= 1 {
            return self.w_start;
        }
        let t = it as f64 / (self.n_iters - 1) as f64;
        self.w_start + t * (self.w_end - self.w_start)
    }
}

/// Minimizes `f` over the p-box. Returns the best value and its point.
fn swarm_minimize(pbox: &PBox, cfg: &SwarmConfig, stream: u64, f: impl Fn(f64, f64) -> f64) -> (f64, (f64, f64)) {
    let lo = [pbox.mu_lo, pbox.sigma_lo];
    let hi = [pbox.mu_hi, pbox.sigma_hi];
    let width = [hi[0] - lo[0], hi[1] - lo[1]];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);

    let sobol = Sobol2::new();
    let mut pos: Vec<[f64; 2]> = (0..cfg.n_particles as u64)
        .map(|k| {
            let [u, v] = sobol.point(k + 1);
            let p = map_to_box(pbox, u, v);
            [p.0, p.1]
        })
        .collect();
    let mut vel: Vec<[f64; 2]> = (0..cfg.n_particles)
        .map(|_| [0, 1].map(|d| (rng.random::<f64>() - 0.5) * width[d]))
        .collect();
    let mut best_pos = pos.clone();
    let mut best_val: Vec<f64> = pos.iter().map(|p| f(p[0], p[1])).collect();
    let mut g = argmin(&best_val);

    for it in 0..cfg.n_iters {
        let w = cfg.inertia(it);
        for k in 0..cfg.n_particles {
            for d in 0..2 {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = w * vel[k][d]
                    + cfg.c1 * r1 * (best_pos[k][d] - pos[k][d])
                    + cfg.c2 * r2 * (best_pos[g][d] - pos[k][d]);
                vel[k][d] = v.clamp(-width[d], width[d]);
                pos[k][d] = (pos[k][d] + vel[k][d]).clamp(lo[d], hi[d]);
            }
            let val = f(pos[k][0], pos[k][1]);
            if val < best_val[k] {
                best_val[k] = val;
                best_pos[k] = pos[k];
            }
        }
        g = argmin(&best_val);
    }
    (best_val[g], (best_pos[g][0], best_pos[g][1]))
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

/// Six independent swarms: minimum and maximum of mean, standard deviation
/// and objective.
pub fn pso_bounds(
    c_ref: &ComplianceMatrix,
    mu_ref: f64,
    sigma_ref: f64,
    pbox: &PBox,
    beta: f64,
    cfg: &SwarmConfig,
    mode: VarianceMode,
) -> Result<MomentBounds> {
    pbox.validate()?;
    cfg.validate()?;
    let sm = ScaledMoments::new(c_ref, mu_ref, sigma_ref, beta, mode)?;
    let mut ivs = [None; 3];
    for (q, iv) in ivs.iter_mut().enumerate() {
        let (lo, arg_lo) = swarm_minimize(pbox, cfg, 2 * q as u64, |m, s| sm.triple(m, s)[q]);
        let (neg_hi, arg_hi) = swarm_minimize(pbox, cfg, 2 * q as u64 + 1, |m, s| -sm.triple(m, s)[q]);
        *iv = Some(Interval {
            lo,
            hi: -neg_hi,
            arg_lo,
            arg_hi,
        });
    }
    let [mean, std_dev, objective] = ivs.map(|i| i.expect("all quantities searched"));
    Ok(MomentBounds {
        engine: Engine::Pso,
        mean,
        std_dev,
        objective,
        beta,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::ca_bounds;
    use crate::random_field::standard_normals;
    use nalgebra::DMatrix;

    fn random_psd(n: usize, seed: u64) -> ComplianceMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = standard_normals(&mut rng, n * n);
        let m = DMatrix::from_fn(n, n, |i, j| a[i * n + j]);
        ComplianceMatrix::new(&m * m.transpose())
    }

    #[test]
    fn matches_corners_on_monotone_objective() {
        let c = random_psd(5, 21);
        let pbox = PBox::new([-1.356, -0.644], [1.289, 1.803]).unwrap();
        let ca = ca_bounds(&c, -1.0, 1.5, &pbox, 1.0, VarianceMode::IsserlisFull).unwrap();
        let pso = pso_bounds(&c, -1.0, 1.5, &pbox, 1.0, &SwarmConfig::default(), VarianceMode::IsserlisFull).unwrap();
        for (a, b) in [(ca.mean, pso.mean), (ca.std_dev, pso.std_dev), (ca.objective, pso.objective)] {
            assert!((a.lo - b.lo).abs() <= 1e-6 * a.lo.abs(), "{a:?} {b:?}");
            assert!((a.hi - b.hi).abs() <= 1e-6 * a.hi.abs(), "{a:?} {b:?}");
        }
        assert!(ca.encloses(&pso, 1e-12));
    }

    #[test]
    fn zero_width_box() {
        let c = random_psd(3, 22);
        let pbox = PBox::point(-1.0, 0.5).unwrap();
        let pso = pso_bounds(&c, -1.0, 0.5, &pbox, 1.0, &SwarmConfig::default(), VarianceMode::IsserlisFull).unwrap();
        assert_eq!(pso.objective.lo, pso.objective.hi);
        assert_eq!(pso.objective.arg_lo, (-1.0, 0.5));
    }

    #[test]
    fn deterministic_for_seed() {
        let c = random_psd(4, 23);
        let pbox = PBox::new([0.5, 2.0], [0.1, 1.0]).unwrap();
        let cfg = SwarmConfig { seed: 9, n_iters: 20, ..Default::default() };
        let a = pso_bounds(&c, 1.0, 1.0, &pbox, 2.0, &cfg, VarianceMode::IsserlisFull).unwrap();
        let b = pso_bounds(&c, 1.0, 1.0, &pbox, 2.0, &cfg, VarianceMode::IsserlisFull).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_single_particle() {
        let cfg = SwarmConfig { n_particles: 1, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn inertia_schedule_endpoints() {
        let cfg = SwarmConfig::default();
        assert_eq!(cfg.inertia(0), 0.9);
        assert!((cfg.inertia(99) - 0.4).abs() < 1e-15);
    }
}
