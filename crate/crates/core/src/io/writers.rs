use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bounds::{scale_compliance, ca_bounds, MomentBounds};
use crate::fem::ComplianceMatrix;
use crate::moments::{mc_compliance_oracle, VarianceMode};
use crate::optimizer::HistoryRecord;
use crate::random_field::PBox;
use crate::{Result, RtoError};

pub const HISTORY_HEADER: &str = "iter,J_lo,J_hi,mu_lo,mu_hi,sigma_lo,sigma_hi,volfrac,max_change";

fn check_field(rho: &[f64], nx: usize, ny: usize) -> Result<()> {
    if rho.len() != nx * ny {
        return Err(RtoError::InvalidInput(format!(
            "field has {} values, a {nx} x {ny} mesh needs {}",
            rho.len(),
            nx * ny
        )));
    }
    if let Some(v) = rho.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(RtoError::InvalidInput(format!("density {v} outside [0, 1]")));
    }
    Ok(())
}

/// Plain graymap, 0 for solid and 255 for void, top row first.
pub fn density_pgm(rho: &[f64], nx: usize, ny: usize, comment: &str) -> Result<String> {
    check_field(rho, nx, ny)?;
    let mut out = String::from("P2\n");
    for line in comment.lines() {
        writeln!(out, "# {line}").unwrap();
    }
    writeln!(out, "{nx} {ny}\n255").unwrap();
    for row in rho.chunks(nx) {
        let px: Vec<String> = row
            .iter()
            .map(|v| ((1.0 - v) * 255.0).round().clamp(0.0, 255.0).to_string())
            .collect();
        writeln!(out, "{}", px.join(" ")).unwrap();
    }
    Ok(out)
}

/// One CSV row per element row, shortest round-trip formatting.
pub fn density_csv(rho: &[f64], nx: usize, ny: usize) -> Result<String> {
    check_field(rho, nx, ny)?;
    let mut out = String::new();
    for row in rho.chunks(nx) {
        let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", vals.join(",")).unwrap();
    }
    Ok(out)
}

/// Parses [`density_csv`] output into `(values, nx, ny)`.
pub fn read_density_csv(text: &str) -> Result<(Vec<f64>, usize, usize)> {
    let mut values = Vec::new();
    let mut nx = None;
    let mut ny = 0;
    for (k, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| RtoError::InvalidInput(format!("density row {}: {e}", k + 1)))?;
        match nx {
            None => nx = Some(row.len()),
            Some(n) if n != row.len() => {
                return Err(RtoError::InvalidInput(format!(
                    "density row {} has {} values, expected {n}",
                    k + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        values.extend(row);
        ny += 1;
    }
    let nx = nx.ok_or_else(|| RtoError::InvalidInput("empty density file".into()))?;
    check_field(&values, nx, ny)?;
    Ok((values, nx, ny))
}

/// Writes `<stem>.pgm` and `<stem>.csv` into `dir`.
pub fn write_density_outputs(
    rho: &[f64],
    nx: usize,
    ny: usize,
    dir: &Path,
    stem: &str,
    comment: &str,
) -> Result<(PathBuf, PathBuf)> {
    let pgm = dir.join(format!("{stem}.pgm"));
    let csv = dir.join(format!("{stem}.csv"));
    std::fs::write(&pgm, density_pgm(rho, nx, ny, comment)?)?;
    std::fs::write(&csv, density_csv(rho, nx, ny)?)?;
    Ok((pgm, csv))
}

pub fn history_csv(history: &[HistoryRecord]) -> String {
    let mut out = format!("{HISTORY_HEADER}\n");
    for r in history {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.iter, r.j_lo, r.j_hi, r.mu_lo, r.mu_hi, r.sigma_lo, r.sigma_hi, r.volfrac, r.max_change
        )
        .unwrap();
    }
    out
}

pub fn write_history(history: &[HistoryRecord], path: &Path) -> Result<()> {
    std::fs::write(path, history_csv(history))?;
    Ok(())
}

pub fn read_history_csv(text: &str) -> Result<Vec<HistoryRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(HISTORY_HEADER) {
        return Err(RtoError::InvalidInput("history file header does not match".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(RtoError::InvalidInput(format!("history row `{line}` needs 9 fields")));
            }
            let num = |i: usize| {
                f[i].parse::<f64>()
                    .map_err(|e| RtoError::InvalidInput(format!("history field `{}`: {e}", f[i])))
            };
            Ok(HistoryRecord {
                iter: f[0]
                    .parse()
                    .map_err(|e| RtoError::InvalidInput(format!("history iteration `{}`: {e}", f[0])))?,
                j_lo: num(1)?,
                j_hi: num(2)?,
                mu_lo: num(3)?,
                mu_hi: num(4)?,
                sigma_lo: num(5)?,
                sigma_hi: num(6)?,
                volfrac: num(7)?,
                max_change: num(8)?,
            })
        })
        .collect()
}

/// Empirical CDF of `sorted` at `t`.
pub fn ecdf(sorted: &[f64], t: f64) -> f64 {
    sorted.partition_point(|v| *v <= t) as f64 / sorted.len() as f64
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter()
        .chain(&b)
        .map(|&t| (ecdf(&a, t) - ecdf(&b, t)).abs())
        .fold(0.0, f64::max)
}

/// Silverman's rule of thumb, `0.9 min(s, IQR/1.34) n^(-1/5)`.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (s.len() - 1) as f64;
        let (i, frac) = (pos.floor() as usize, pos.fract());
        s[i] + frac * (s[(i + 1).min(s.len() - 1)] - s[i])
    };
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

/// Gaussian kernel density estimate at `t`.
pub fn kde(samples: &[f64], h: f64, t: f64) -> f64 {
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    norm * samples.iter().map(|x| (-0.5 * ((t - x) / h).powi(2)).exp()).sum::<f64>()
}

/// CDF and PDF of the compliance at the two objective-bound corners.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelopes {
    pub lower_corner: (f64, f64),
    pub upper_corner: (f64, f64),
    pub t: Vec<f64>,
    pub cdf_lower: Vec<f64>,
    pub cdf_upper: Vec<f64>,
    pub pdf_lower: Vec<f64>,
    pub pdf_upper: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn distribution_envelopes(
    c_ref: &ComplianceMatrix,
    reference: (f64, f64),
    pbox: &PBox,
    beta: f64,
    mode: VarianceMode,
    n_samples: usize,
    n_grid: usize,
    seed: u64,
) -> Result<Envelopes> {
    if n_samples < 100 {
        return Err(RtoError::InvalidInput(format!("envelopes need at least 100 samples, got {n_samples}")));
    }
    if n_grid < 2 {
        return Err(RtoError::InvalidInput("envelope grid needs at least 2 points".into()));
    }
    let (mu_ref, sigma_ref) = reference;
    let b = ca_bounds(c_ref, mu_ref, sigma_ref, pbox, beta, mode)?;
    let (lower_corner, upper_corner) = (b.objective.arg_lo, b.objective.arg_hi);
    let draw = |corner: (f64, f64)| -> Result<Vec<f64>> {
        let c = scale_compliance(c_ref, mu_ref, sigma_ref, corner.0, corner.1)?;
        let mut s = mc_compliance_oracle(&c, n_samples, seed)?.samples;
        s.sort_by(f64::total_cmp);
        Ok(s)
    };
    let lo = draw(lower_corner)?;
    let hi = draw(upper_corner)?;
    let (h_lo, h_hi) = (silverman_bandwidth(&lo), silverman_bandwidth(&hi));
    let t_min = (lo[0] - 3.0 * h_lo).min(hi[0] - 3.0 * h_hi);
    let t_max = (lo[n_samples - 1] + 3.0 * h_lo).max(hi[n_samples - 1] + 3.0 * h_hi);
    let t: Vec<f64> = (0..n_grid)
        .map(|k| t_min + (t_max - t_min) * k as f64 / (n_grid - 1) as f64)
        .collect();
    let pdf = |s: &[f64], h: f64| -> Vec<f64> {
        if h > 0.0 {
            t.iter().map(|&x| kde(s, h, x)).collect()
        } else {
            vec![0.0; t.len()]
        }
    };
    Ok(Envelopes {
        lower_corner,
        upper_corner,
        cdf_lower: t.iter().map(|&x| ecdf(&lo, x)).collect(),
        cdf_upper: t.iter().map(|&x| ecdf(&hi, x)).collect(),
        pdf_lower: pdf(&lo, h_lo),
        pdf_upper: pdf(&hi, h_hi),
        t,
    })
}

pub fn envelopes_csv(env: &Envelopes) -> String {
    let mut out = String::from("t,cdf_lower,cdf_upper,pdf_lower,pdf_upper\n");
    for k in 0..env.t.len() {
        writeln!(
            out,
            "{},{},{},{},{}",
            env.t[k], env.cdf_lower[k], env.cdf_upper[k], env.pdf_lower[k], env.pdf_upper[k]
        )
        .unwrap();
    }
    out
}

/// Header comment shared by the artifacts of one run.
pub fn provenance(hash: &str, seed: u64) -> String {
    format!("config {hash} seed {seed}")
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport<'a> {
    pub config_hash: &'a str,
    pub seed: u64,
    pub bounds: &'a MomentBounds,
}

/// TOML report of one set of bounds.
pub fn bounds_toml(bounds: &MomentBounds, hash: &str, seed: u64) -> String {
    let report = BoundsReport {
        config_hash: hash,
        seed,
        bounds,
    };
    toml::to_string(&report).expect("bounds always serialize")
}
