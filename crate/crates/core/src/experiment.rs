//! Seeded Monte Carlo runs over an `n` grid, moment estimation and
//! scaling-exponent fits.
//!
//! Replication `rep` at sample size `n` draws its points from
//! `StreamRng::new(seed, replication_stream(n, rep))`, so every record is a
//! pure function of the configuration; the worker pool only changes how fast
//! the records arrive, never what they are or the order they are reported in.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::check_radius;
use crate::error::{Error, Result};
use crate::hull::{convex_hull, hull_fast_with_report, hull_oracle, summarize};
use crate::rng::{replication_stream, StreamRng};
use crate::shapes::{sample_uniform, ConvexDiscModel, ModelSpec};

/// Largest tolerated fraction of replications that needed the oracle.
pub const MAX_INCIDENT_RATE: f64 = 1e-3;

pub const RECORDS_HEADER: &str = "n,rep,f0,hull_area,missed_area";
pub const MOMENTS_HEADER: &str =
    "n,M,mean_f0,se_mean_f0,var_f0,se_var_f0,mean_missed,se_mean_missed,var_missed,se_var_missed";
pub const JACKKNIFE_HEADER: &str = "n,M,jk_se_var_f0,jk_se_var_missed";

/// `n = 2^k` for `k = 10..=17`.
pub fn default_n_grid() -> Vec<u64> {
    (10..=17).map(|k| 1u64 << k).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub r: f64,
    pub n_grid: Vec<u64>,
    pub reps: usize,
    pub seed: u64,
    pub workers: usize,
}

impl ExperimentConfig {
    /// Checks the configuration and builds its model.
    pub fn validate(&self) -> Result<ConvexDiscModel> {
        let model = self.model.build()?;
        check_radius(&model, self.r)?;
        if self.n_grid.is_empty() {
            return Err(Error::InvalidConfig("n grid is empty".into()));
        }
        if self.n_grid[0] == 0 {
            return Err(Error::InvalidConfig("sample sizes must be at least 1".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("n grid must be strictly increasing".into()));
        }
        if self.n_grid.iter().any(|&n| n >= 1 << 32) {
            return Err(Error::InvalidConfig("sample sizes must be below 2^32".into()));
        }
        if self.reps == 0 || self.reps as u64 >= 1 << 32 {
            return Err(Error::InvalidConfig(format!("reps = {} out of range", self.reps)));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub n: u64,
    pub rep: u64,
    pub f0: usize,
    pub hull_area: f64,
    pub missed_area: f64,
}

/// A replication whose hull needed the oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incident {
    pub n: u64,
    pub rep: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentOutput {
    pub records: Vec<SampleRecord>,
    pub incidents: Vec<Incident>,
}

fn replicate(model: &ConvexDiscModel, r: f64, seed: u64, n: u64, rep: u64) -> Result<(SampleRecord, Option<Incident>)> {
    let mut rng = StreamRng::new(seed, replication_stream(n, rep));
    let points = sample_uniform(model, &mut rng, n as usize)?;
    let (poly, incident) = match hull_fast_with_report(&points, r) {
        Ok((poly, report)) => {
            let incident = report.fell_back.then(|| Incident {
                n,
                rep,
                reason: "spindle scan failed verification".into(),
            });
            (poly, incident)
        }
        Err(e) => {
            log::warn!("replication n={n} rep={rep}: {e}; rerunning with the oracle");
            let poly = hull_oracle(&convex_hull(&points), r)?;
            (
                poly,
                Some(Incident {
                    n,
                    rep,
                    reason: e.to_string(),
                }),
            )
        }
    };
    let s = summarize(model, &poly)?;
    Ok((
        SampleRecord {
            n,
            rep,
            f0: s.f0,
            hull_area: s.hull_area,
            missed_area: s.missed_area,
        },
        incident,
    ))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let model = config.validate()?;
    let tasks: Vec<(u64, u64)> = config
        .n_grid
        .iter()
        .flat_map(|&n| (0..config.reps as u64).map(move |rep| (n, rep)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<(SampleRecord, Option<Incident>)>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(n, rep)| replicate(&model, config.r, config.seed, n, rep))
            .collect()
    });
    let mut out = ExperimentOutput::default();
    for res in results {
        let (record, incident) = res?;
        out.records.push(record);
        out.incidents.extend(incident);
    }
    let rate = out.incidents.len() as f64 / tasks.len() as f64;
    if rate > MAX_INCIDENT_RATE {
        return Err(Error::TooManyIncidents {
            rate,
            limit: MAX_INCIDENT_RATE,
        });
    }
    Ok(out)
}

/// Mean and unbiased variance of one sample, with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub var: f64,
    /// `s / √M`
    pub se_mean: f64,
    /// Normal theory: `s² √(2 / (M − 1))`.
    pub se_var: f64,
    /// Delete-one jackknife standard error of the variance; needs `M ≥ 3`.
    pub jackknife_se_var: Option<f64>,
}

impl Moments {
    pub fn of(values: &[f64]) -> Option<Moments> {
        let m = values.len();
        if m < 2 {
            return None;
        }
        let mf = m as f64;
        let mean = values.iter().sum::<f64>() / mf;
        let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
        let ss: f64 = dev.iter().map(|d| d * d).sum();
        let var = ss / (mf - 1.0);
        // Leave-one-out variances from the centered sums:
        // SS₋ᵢ = SS − dᵢ² · M/(M − 1), var₋ᵢ = SS₋ᵢ / (M − 2).
        let jackknife_se_var = (m >= 3).then(|| {
            let loo: Vec<f64> = dev
                .iter()
                .map(|d| (ss - d * d * mf / (mf - 1.0)) / (mf - 2.0))
                .collect();
            let loo_mean = loo.iter().sum::<f64>() / mf;
            let spread: f64 = loo.iter().map(|v| (v - loo_mean).powi(2)).sum();
            ((mf - 1.0) / mf * spread).sqrt()
        });
        Some(Moments {
            mean,
            var,
            se_mean: (var / mf).sqrt(),
            se_var: var * (2.0 / (mf - 1.0)).sqrt(),
            jackknife_se_var,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub n: u64,
    pub m: usize,
    pub mean_f0: f64,
    pub var_f0: f64,
    pub se_mean_f0: f64,
    pub se_var_f0: f64,
    pub mean_missed: f64,
    pub var_missed: f64,
    pub se_mean_missed: f64,
    pub se_var_missed: f64,
    pub jackknife_se_var_f0: Option<f64>,
    pub jackknife_se_var_missed: Option<f64>,
}

/// One estimate per distinct `n`, in increasing `n`.
pub fn estimate_moments(records: &[SampleRecord]) -> Result<Vec<MomentEstimate>> {
    let mut groups: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for rec in records {
        let g = groups.entry(rec.n).or_default();
        g.0.push(rec.f0 as f64);
        g.1.push(rec.missed_area);
    }
    groups
        .into_iter()
        .map(|(n, (f0, missed))| {
            let insufficient = || Error::InsufficientReplications {
                n,
                needed: 2,
                got: f0.len(),
            };
            let a = Moments::of(&f0).ok_or_else(insufficient)?;
            let b = Moments::of(&missed).ok_or_else(insufficient)?;
            Ok(MomentEstimate {
                n,
                m: f0.len(),
                mean_f0: a.mean,
                var_f0: a.var,
                se_mean_f0: a.se_mean,
                se_var_f0: a.se_var,
                mean_missed: b.mean,
                var_missed: b.var,
                se_mean_missed: b.se_mean,
                se_var_missed: b.se_var,
                jackknife_se_var_f0: a.jackknife_se_var,
                jackknife_se_var_missed: b.jackknife_se_var,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub points_used: usize,
}

/// Least-squares fit of `log(value) = intercept + slope · log(n)`, optionally
/// weighted (e.g. by inverse variances of `log(value)`).
pub fn fit_exponent(pairs: &[(f64, f64)], weights: Option<&[f64]>) -> Result<FitResult> {
    let k = pairs.len();
    if k < 3 {
        return Err(Error::InvalidConfig(format!("need at least 3 points to fit, got {k}")));
    }
    if let Some(w) = weights {
        if w.len() != k || w.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidConfig("weights must be positive, one per point".into()));
        }
    }
    for &(n, v) in pairs {
        if !(n > 0.0) {
            return Err(Error::NonpositiveValue(n));
        }
        if !(v > 0.0) {
            return Err(Error::NonpositiveValue(v));
        }
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let ws: Vec<f64> = weights.map_or_else(|| vec![1.0; k], <[f64]>::to_vec);
    let sw: f64 = ws.iter().sum();
    let xbar = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ybar = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((x, y), w) in xs.iter().zip(&ys).zip(&ws) {
        sxx += w * (x - xbar) * (x - xbar);
        sxy += w * (x - xbar) * (y - ybar);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("all n values are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .zip(&ws)
        .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    // With weights normalized to mean one, this is the usual residual-based
    // standard error.
    let scale = k as f64 / sw;
    let sigma2 = rss * scale / (k as f64 - 2.0);
    Ok(FitResult {
        slope,
        intercept,
        slope_stderr: (sigma2 / (sxx * scale)).sqrt(),
        points_used: k,
    })
}

/// Records as CSV (`RECORDS_HEADER`), reals in shortest round-trip form.
pub fn records_csv(records: &[SampleRecord]) -> String {
    let mut s = String::with_capacity(40 * (records.len() + 1));
    s.push_str(RECORDS_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(s, "{},{},{},{},{}", r.n, r.rep, r.f0, r.hull_area, r.missed_area);
    }
    s
}

pub fn moments_csv(estimates: &[MomentEstimate]) -> String {
    let mut s = String::new();
    s.push_str(MOMENTS_HEADER);
    s.push('\n');
    for e in estimates {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            e.n,
            e.m,
            e.mean_f0,
            e.se_mean_f0,
            e.var_f0,
            e.se_var_f0,
            e.mean_missed,
            e.se_mean_missed,
            e.var_missed,
            e.se_var_missed
        );
    }
    s
}

/// Jackknife standard errors of the variances; empty fields where `M < 3`.
pub fn jackknife_csv(estimates: &[MomentEstimate]) -> String {
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut s = String::new();
    s.push_str(JACKKNIFE_HEADER);
    s.push('\n');
    for e in estimates {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            e.n,
            e.m,
            opt(e.jackknife_se_var_f0),
            opt(e.jackknife_se_var_missed)
        );
    }
    s
}
