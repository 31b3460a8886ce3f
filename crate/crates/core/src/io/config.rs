use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fem::{LoadEdge, Mesh, Side, SimpParams, SupportPreset};
use crate::filter::AlphaSchedule;
use crate::moments::{ObjectiveParams, VarianceMode};
use crate::optimizer::{BoundEngine, OptimizerSettings, PeriodicLayout, Problem};
use crate::random_field::{kl_basis, pbox_from_moments, pbox_from_samples, ExponentialKernel, KLBasis, PBox};
use crate::{Result, RtoError};

/// Full description of one run, as read from a `.cfg` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub material: SimpParams,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<UncertaintyConfig>,
    #[serde(default)]
    pub objective: ObjectiveConfig,
    #[serde(default)]
    pub bounds: BoundEngine,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<PeriodicConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "one")]
    pub elem_size: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supports: Option<SupportPreset>,
    /// Extra constrained DOFs, added to the preset.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fixed_dofs: Vec<usize>,
    pub load: LoadConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadConfig {
    pub side: Side,
    /// First element boundary of the span, counted along the side.
    #[serde(default)]
    pub start: usize,
    /// Last element boundary; the whole side when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<usize>,
    #[serde(default = "vertical")]
    pub direction: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub radius: f64,
    pub alpha: AlphaSchedule,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            radius: 3.0,
            alpha: AlphaSchedule::default(),
        }
    }
}

/// Load field statistics. The p-box comes either from `mu`/`sigma`
/// intervals or from a `samples` block.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corr_len: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleConfig>,
    /// Fixed K-L order; overrides `significance`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub significance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
}

/// Observations behind the p-box, raw or summarized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub ci: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_dev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObjectiveConfig {
    pub beta: f64,
    pub w1: f64,
    pub w2: f64,
    pub variance_mode: VarianceMode,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        let p = ObjectiveParams::default();
        ObjectiveConfig {
            beta: p.beta,
            w1: p.w1,
            w2: p.w2,
            variance_mode: VarianceMode::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicConfig {
    pub cells_x: usize,
    pub cells_y: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Monte Carlo draws per corner for the distribution envelopes.
    pub envelope_samples: usize,
    pub envelope_grid: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            envelope_samples: 10_000,
            envelope_grid: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub samples: usize,
    /// K-L order of the direct realizations. Defaults to one term per load
    /// edge element, the modes the edge nodes resolve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct_order: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 1000,
            direct_order: None,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn vertical() -> [f64; 2] {
    [0.0, 1.0]
}

const DEFAULT_SIGNIFICANCE: f64 = 0.9;
const DEFAULT_MAX_ORDER: usize = 200;

impl RunConfig {
    /// Reads and validates a config file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RtoError::config("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let value: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| RtoError::config("<syntax>", e.to_string().trim_end()))?;
        let cfg: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(value)).map_err(|e| {
            let key = e.path().to_string();
            RtoError::config(if key == "." { "<root>".into() } else { key }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every default written out.
    pub fn resolved_toml(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    /// SHA-256 of the resolved config, hex encoded. The output directory
    /// does not take part.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output.dir = PathBuf::new();
        Sha256::digest(c.resolved_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let o = &self.objective;
        if !(o.beta >= 0.0 && o.beta.is_finite()) {
            return Err(RtoError::config("objective.beta", format!("must be >= 0, got {}", o.beta)));
        }
        if !(o.w1 >= 0.0 && o.w2 >= 0.0) || (o.w1 + o.w2 - 1.0).abs() > 1e-9 {
            return Err(RtoError::config(
                "objective.w1",
                format!("w1 and w2 must be non-negative and sum to 1, got {} + {}", o.w1, o.w2),
            ));
        }
        let u = self
            .uncertainty
            .as_ref()
            .ok_or_else(|| RtoError::config("uncertainty", "block is missing"))?;
        if *u == UncertaintyConfig::default() {
            return Err(RtoError::config("uncertainty", "block is empty"));
        }
        if self.verify.samples < 2 {
            return Err(RtoError::config("verify.samples", "at least 2 samples are needed"));
        }
        if self.output.envelope_samples < 100 {
            return Err(RtoError::config("output.envelope_samples", "at least 100 samples are needed"));
        }
        if self.output.envelope_grid < 2 {
            return Err(RtoError::config("output.envelope_grid", "at least 2 grid points are needed"));
        }
        // builds every derived object once so bad values surface here
        self.mesh()?;
        self.pbox()?;
        self.kernel()?;
        let problem = self.problem_without_basis()?;
        problem.validate().map_err(|e| RtoError::config("optimizer", e.to_string()))
    }

    pub fn mesh(&self) -> Result<Mesh> {
        let m = &self.mesh;
        let side_len = match m.load.side {
            Side::Top | Side::Bottom => m.nx,
            Side::Left | Side::Right => m.ny,
        };
        let end = m.load.end.unwrap_or(side_len);
        let nodes = Mesh::side_span(m.nx, m.ny, m.load.side, m.load.start, end)
            .map_err(|e| RtoError::config("mesh.load", e.to_string()))?;
        let [dx, dy] = m.load.direction;
        let norm = (dx * dx + dy * dy).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(RtoError::config("mesh.load.direction", "must be a non-zero vector"));
        }
        let mut fixed = m
            .supports
            .map(|p| Mesh::preset_dofs(m.nx, m.ny, p))
            .unwrap_or_default();
        fixed.extend_from_slice(&m.fixed_dofs);
        if fixed.is_empty() {
            return Err(RtoError::config("mesh.supports", "no supports given"));
        }
        let load_edge = LoadEdge {
            nodes,
            direction: [dx / norm, dy / norm],
        };
        Mesh::new(m.nx, m.ny, m.elem_size, fixed, load_edge).map_err(|e| RtoError::config("mesh", e.to_string()))
    }

    fn uncertainty(&self) -> &UncertaintyConfig {
        self.uncertainty.as_ref().expect("validated config has an uncertainty block")
    }

    pub fn pbox(&self) -> Result<PBox> {
        let u = self
            .uncertainty
            .as_ref()
            .ok_or_else(|| RtoError::config("uncertainty", "block is missing"))?;
        let bad = |key: &str, e: RtoError| RtoError::config(key, e.to_string());
        match (&u.mu, &u.sigma, &u.samples) {
            (Some(mu), Some(sigma), None) => PBox::new(*mu, *sigma).map_err(|e| bad("uncertainty.mu", e)),
            (None, None, Some(s)) => match (&s.values, s.mean, s.std_dev, s.count) {
                (Some(v), None, None, None) => pbox_from_samples(v, s.ci).map_err(|e| bad("uncertainty.samples", e)),
                (None, Some(m), Some(sd), Some(n)) => {
                    pbox_from_moments(m, sd, n, s.ci).map_err(|e| bad("uncertainty.samples", e))
                }
                _ => Err(RtoError::config(
                    "uncertainty.samples",
                    "give either `values` or all of `mean`, `std_dev`, `count`",
                )),
            },
            _ => Err(RtoError::config(
                "uncertainty",
                "give either both `mu` and `sigma` intervals or a `samples` block",
            )),
        }
    }

    /// Field kernel over the load edge, standard deviation 1.
    pub fn kernel(&self) -> Result<ExponentialKernel> {
        let corr_len = self
            .uncertainty
            .as_ref()
            .and_then(|u| u.corr_len)
            .ok_or_else(|| RtoError::config("uncertainty.corr_len", "correlation length is required"))?;
        let m = &self.mesh;
        let len = match m.load.side {
            Side::Top | Side::Bottom => m.nx,
            Side::Left | Side::Right => m.ny,
        };
        let span = m.load.end.unwrap_or(len).saturating_sub(m.load.start) as f64 * m.elem_size;
        ExponentialKernel::new(1.0, corr_len, 0.5 * span).map_err(|e| RtoError::config("uncertainty.corr_len", e.to_string()))
    }

    /// K-L basis at the configured order or by significance check.
    pub fn basis(&self) -> Result<KLBasis> {
        let u = self.uncertainty();
        let kernel = self.kernel()?;
        let res = match u.order {
            Some(m) => kl_basis(kernel, m),
            None => KLBasis::with_significance(
                kernel,
                u.significance.unwrap_or(DEFAULT_SIGNIFICANCE),
                u.max_order.unwrap_or(DEFAULT_MAX_ORDER),
            ),
        };
        res.map_err(|e| RtoError::config("uncertainty", e.to_string()))
    }

    fn problem_without_basis(&self) -> Result<Problem> {
        let o = &self.objective;
        let engine = match self.bounds {
            BoundEngine::Pso(cfg) => BoundEngine::Pso(crate::bounds::SwarmConfig { seed: self.seed, ..cfg }),
            e => e,
        };
        let periodic = match self.periodic {
            Some(p) => Some(
                PeriodicLayout::for_mesh(self.mesh.nx, self.mesh.ny, p.cells_x, p.cells_y)
                    .map_err(|e| RtoError::config("periodic", e.to_string()))?,
            ),
            None => None,
        };
        Ok(Problem {
            mesh: self.mesh()?,
            simp: self.material,
            filter_radius: self.filter.radius,
            alpha: self.filter.alpha,
            pbox: self.pbox()?,
            basis: None,
            objective: ObjectiveParams {
                beta: o.beta,
                w1: o.w1,
                w2: o.w2,
            },
            mode: o.variance_mode,
            engine,
            settings: self.optimizer,
            periodic,
        })
    }

    /// The optimization problem this config describes.
    pub fn problem(&self) -> Result<Problem> {
        Ok(Problem {
            basis: Some(self.basis()?),
            ..self.problem_without_basis()?
        })
    }
}
