//! Interval bounds of the compliance moments over a p-box.
//!
//! The compliance matrix at any `(μ_f, σ_f)` is an exact rescaling of the
//! one computed at the reference parameters, so every engine here only
//! evaluates small matrix expressions, never a finite element solve.

mod monotonicity;
mod pso;
mod sobol;

use serde::{Deserialize, Serialize};

pub use monotonicity::{monotonicity_report, MonotonicityEntry, MonotonicityReport, SlopeSign, SweepInput};
pub use pso::{pso_bounds, SwarmConfig};
pub use sobol::Sobol2;

use crate::fem::ComplianceMatrix;
use crate::moments::{compliance_moments, MomentResult, VarianceMode};
use crate::random_field::PBox;
use crate::{Result, RtoError};

/// Points skipped at the head of the Sobol sequence.
pub const QMCS_SKIP: u64 = 1000;
/// Only every this-many-th Sobol point after the skip is used.
pub const QMCS_STRIDE: u64 = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Ca,
    Qmcs,
    Pso,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Ca => "CA",
            Engine::Qmcs => "QMCS",
            Engine::Pso => "PSO",
        }
    }
}

/// Lower and upper value of one quantity with the `(μ_f, σ_f)` points
/// attaining them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub arg_lo: (f64, f64),
    pub arg_hi: (f64, f64),
}

impl Interval {
    fn at(value: f64, p: (f64, f64)) -> Self {
        Interval {
            lo: value,
            hi: value,
            arg_lo: p,
            arg_hi: p,
        }
    }

    fn absorb(&mut self, value: f64, p: (f64, f64)) {
        if value < self.lo {
            self.lo = value;
            self.arg_lo = p;
        }
        if value > self.hi {
            self.hi = value;
            self.arg_hi = p;
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Whether `other` lies inside `self` up to `tol` relative to the width.
    pub fn encloses(&self, other: &Interval, tol: f64) -> bool {
        let slack = tol * self.width().abs().max(self.hi.abs().max(self.lo.abs()) * 1e-12);
        self.lo <= other.lo + slack && other.hi <= self.hi + slack
    }
}

/// Bounds of mean, standard deviation and objective of the compliance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentBounds {
    pub engine: Engine,
    pub mean: Interval,
    pub std_dev: Interval,
    pub objective: Interval,
    pub beta: f64,
    pub mode: VarianceMode,
}

impl MomentBounds {
    pub fn mean_lo(&self) -> f64 {
        self.mean.lo
    }
    pub fn mean_hi(&self) -> f64 {
        self.mean.hi
    }
    pub fn std_lo(&self) -> f64 {
        self.std_dev.lo
    }
    pub fn std_hi(&self) -> f64 {
        self.std_dev.hi
    }
    pub fn obj_lo(&self) -> f64 {
        self.objective.lo
    }
    pub fn obj_hi(&self) -> f64 {
        self.objective.hi
    }

    pub fn encloses(&self, other: &MomentBounds, tol: f64) -> bool {
        self.mean.encloses(&other.mean, tol)
            && self.std_dev.encloses(&other.std_dev, tol)
            && self.objective.encloses(&other.objective, tol)
    }
}

/// `c_ij ↦ s_i s_j c_ij` with `s_0 = μ/μ_ref` and `s_i = σ/σ_ref` for `i ≥ 1`.
pub fn scale_compliance(
    c_ref: &ComplianceMatrix,
    mu_ref: f64,
    sigma_ref: f64,
    mu: f64,
    sigma: f64,
) -> Result<ComplianceMatrix> {
    if mu_ref == 0.0 || sigma_ref == 0.0 {
        return Err(RtoError::InvalidInput(format!(
            "reference parameters must be non-zero (mu_ref={mu_ref}, sigma_ref={sigma_ref})"
        )));
    }
    let s = scale_factors(c_ref.dim(), mu / mu_ref, sigma / sigma_ref);
    let n = c_ref.dim();
    Ok(ComplianceMatrix::new(nalgebra::DMatrix::from_fn(n, n, |i, j| {
        s[i] * s[j] * c_ref.get(i, j)
    })))
}

pub(crate) fn scale_factors(n: usize, s0: f64, s1: f64) -> Vec<f64> {
    (0..n).map(|i| if i == 0 { s0 } else { s1 }).collect()
}

/// Moment evaluation at arbitrary points of a p-box.
#[derive(Debug, Clone)]
pub struct ScaledMoments<'a> {
    pub c_ref: &'a ComplianceMatrix,
    pub mu_ref: f64,
    pub sigma_ref: f64,
    pub beta: f64,
    pub mode: VarianceMode,
}

impl<'a> ScaledMoments<'a> {
    pub fn new(c_ref: &'a ComplianceMatrix, mu_ref: f64, sigma_ref: f64, beta: f64, mode: VarianceMode) -> Result<Self> {
        if mu_ref == 0.0 || sigma_ref == 0.0 {
            return Err(RtoError::InvalidInput(format!(
                "reference parameters must be non-zero (mu_ref={mu_ref}, sigma_ref={sigma_ref})"
            )));
        }
        Ok(ScaledMoments {
            c_ref,
            mu_ref,
            sigma_ref,
            beta,
            mode,
        })
    }

    pub fn at(&self, mu: f64, sigma: f64) -> MomentResult {
        let c = scale_compliance(self.c_ref, self.mu_ref, self.sigma_ref, mu, sigma)
            .expect("reference parameters checked at construction");
        compliance_moments(&c, self.mode)
    }

    /// `(mean, std, objective)` at one point.
    pub fn triple(&self, mu: f64, sigma: f64) -> [f64; 3] {
        let m = self.at(mu, sigma);
        [m.mean, m.std_dev, m.objective(self.beta)]
    }

    fn bounds_over(&self, engine: Engine, points: impl IntoIterator<Item = (f64, f64)>) -> MomentBounds {
        let mut it = points.into_iter();
        let p0 = it.next().expect("at least one evaluation point");
        let t = self.triple(p0.0, p0.1);
        let mut ivs = [Interval::at(t[0], p0), Interval::at(t[1], p0), Interval::at(t[2], p0)];
        for p in it {
            let t = self.triple(p.0, p.1);
            for (iv, v) in ivs.iter_mut().zip(t) {
                iv.absorb(v, p);
            }
        }
        MomentBounds {
            engine,
            mean: ivs[0],
            std_dev: ivs[1],
            objective: ivs[2],
            beta: self.beta,
            mode: self.mode,
        }
    }
}

/// Corner evaluation. Exact when the moments are monotone in `|μ_f|` and
/// `σ_f`, which requires a mean interval that keeps one sign.
pub fn ca_bounds(
    c_ref: &ComplianceMatrix,
    mu_ref: f64,
    sigma_ref: f64,
    pbox: &PBox,
    beta: f64,
    mode: VarianceMode,
) -> Result<MomentBounds> {
    pbox.validate()?;
    if pbox.mu_lo < 0.0 && pbox.mu_hi > 0.0 {
        return Err(RtoError::PreconditionViolation(format!(
            "mean interval [{}, {}] straddles zero; corner evaluation is not exact there, use qmcs or pso",
            pbox.mu_lo, pbox.mu_hi
        )));
    }
    let sm = ScaledMoments::new(c_ref, mu_ref, sigma_ref, beta, mode)?;
    Ok(sm.bounds_over(Engine::Ca, pbox.corners()))
}

/// Scan over `n_points` thinned Sobol points mapped into the p-box.
pub fn qmcs_bounds(
    c_ref: &ComplianceMatrix,
    mu_ref: f64,
    sigma_ref: f64,
    pbox: &PBox,
    beta: f64,
    n_points: usize,
    mode: VarianceMode,
) -> Result<MomentBounds> {
    pbox.validate()?;
    if n_points == 0 {
        return Err(RtoError::InvalidInput("QMCS needs at least one point".into()));
    }
    let sm = ScaledMoments::new(c_ref, mu_ref, sigma_ref, beta, mode)?;
    let pts = Sobol2::new().thinned(n_points, QMCS_SKIP, QMCS_STRIDE);
    let mapped = pts.into_iter().map(|[u, v]| map_to_box(pbox, u, v));
    Ok(sm.bounds_over(Engine::Qmcs, mapped))
}

pub(crate) fn map_to_box(pbox: &PBox, u: f64, v: f64) -> (f64, f64) {
    (
        pbox.mu_lo + u * (pbox.mu_hi - pbox.mu_lo),
        pbox.sigma_lo + v * (pbox.sigma_hi - pbox.sigma_lo),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{mean_compliance, variance_compliance};
    use crate::random_field::standard_normals;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_psd(n: usize, seed: u64) -> ComplianceMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = standard_normals(&mut rng, n * n);
        let m = DMatrix::from_fn(n, n, |i, j| a[i * n + j]);
        ComplianceMatrix::new(&m * m.transpose())
    }

    #[test]
    fn identity_scaling() {
        let c = random_psd(4, 1);
        let s = scale_compliance(&c, -1.0, 1.5, -1.0, 1.5).unwrap();
        assert_eq!(s.c, c.c);
        assert!(scale_compliance(&c, 0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn mean_splits_into_mu_and_sigma_parts() {
        let c = random_psd(4, 2);
        let sm = ScaledMoments::new(&c, 1.0, 1.0, 0.0, VarianceMode::IsserlisFull).unwrap();
        let rest: f64 = (1..4).map(|i| c.get(i, i)).sum();
        for (mu, sigma) in [(2.0, 0.5), (-3.0, 1.5), (0.5, 4.0)] {
            let want = mu * mu * c.get(0, 0) + sigma * sigma * rest;
            assert!((sm.at(mu, sigma).mean - want).abs() < 1e-10 * want);
        }
    }

    #[test]
    fn ca_diag_example() {
        let c = ComplianceMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let pbox = PBox::new([1.0, 2.0], [1.0, 2.0]).unwrap();
        let b = ca_bounds(&c, 1.0, 1.0, &pbox, 1.0, VarianceMode::IsserlisFull).unwrap();
        assert_eq!((b.mean.lo, b.mean.hi), (2.0, 8.0));
        assert_eq!(b.mean.arg_lo, (1.0, 1.0));
        assert_eq!(b.mean.arg_hi, (2.0, 2.0));
    }

    #[test]
    fn ca_rejects_straddling_mean() {
        let c = random_psd(3, 3);
        let pbox = PBox::new([-1.0, 1.0], [1.0, 2.0]).unwrap();
        assert!(matches!(
            ca_bounds(&c, 1.0, 1.0, &pbox, 1.0, VarianceMode::IsserlisFull),
            Err(RtoError::PreconditionViolation(_))
        ));
    }

    #[test]
    fn zero_width_box_is_a_point() {
        let c = random_psd(3, 4);
        let pbox = PBox::point(-1.2, 0.7).unwrap();
        let b = ca_bounds(&c, -1.0, 1.0, &pbox, 2.0, VarianceMode::IsserlisFull).unwrap();
        let m = ScaledMoments::new(&c, -1.0, 1.0, 2.0, VarianceMode::IsserlisFull).unwrap().at(-1.2, 0.7);
        assert_eq!((b.mean.lo, b.mean.hi), (m.mean, m.mean));
        assert_eq!((b.objective.lo, b.objective.hi), (m.objective(2.0), m.objective(2.0)));
        let q = qmcs_bounds(&c, -1.0, 1.0, &pbox, 2.0, 1, VarianceMode::IsserlisFull).unwrap();
        assert_eq!(q.objective.lo, q.objective.hi);
    }

    #[test]
    fn qmcs_inside_ca() {
        for seed in 0..20 {
            let c = random_psd(5, 100 + seed);
            let pbox = PBox::new([-1.356, -0.644], [1.289, 1.803]).unwrap();
            let ca = ca_bounds(&c, -1.0, 1.5, &pbox, 1.0, VarianceMode::IsserlisFull).unwrap();
            let q = qmcs_bounds(&c, -1.0, 1.5, &pbox, 1.0, 500, VarianceMode::IsserlisFull).unwrap();
            assert!(ca.encloses(&q, 1e-12), "seed {seed}");
        }
    }

    #[test]
    fn qmcs_gap_small_at_10000() {
        let c = random_psd(5, 7);
        let pbox = PBox::new([-1.356, -0.644], [1.289, 1.803]).unwrap();
        let ca = ca_bounds(&c, -1.0, 1.5, &pbox, 1.0, VarianceMode::IsserlisFull).unwrap();
        let q = qmcs_bounds(&c, -1.0, 1.5, &pbox, 1.0, 10_000, VarianceMode::IsserlisFull).unwrap();
        for (a, b) in [(ca.mean, q.mean), (ca.std_dev, q.std_dev), (ca.objective, q.objective)] {
            assert!((a.width() - b.width()) / a.width() < 0.02);
        }
    }

    #[test]
    fn scaled_moments_match_direct_formulas() {
        let c = random_psd(4, 5);
        let scaled = scale_compliance(&c, 2.0, 0.5, -1.0, 1.0).unwrap();
        let sm = ScaledMoments::new(&c, 2.0, 0.5, 1.0, VarianceMode::PaperEq26).unwrap();
        let m = sm.at(-1.0, 1.0);
        assert!((m.mean - mean_compliance(&scaled)).abs() < 1e-12);
        assert!((m.variance - variance_compliance(&scaled, VarianceMode::PaperEq26)).abs() < 1e-10);
    }
}
