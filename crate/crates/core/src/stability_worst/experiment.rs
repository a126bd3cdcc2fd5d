use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::curves::{curve_a, curve_b, measurements_for};
use super::frames::gaussian_ensemble;
use super::lipschitz::operator_norm;
use super::scp::{scp_sigma, DEFAULT_SCP_BUDGET};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

pub const POINTS_HEADER: &str = "M,R,trial,log10_value";
pub const SUMMARY_HEADER: &str = "M,R,mean,curve_a,curve_b";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianExperimentConfig {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "R_values")]
    pub r_values: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    pub budget: usize,
}

impl GaussianExperimentConfig {
    pub fn new(m: usize, r_values: Vec<f64>, trials: usize, base_seed: u64) -> Self {
        Self {
            m,
            r_values,
            trials,
            base_seed,
            budget: DEFAULT_SCP_BUDGET,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidArgument("M must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.r_values.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one redundancy is required".into(),
            ));
        }
        if let Some(r) = self.r_values.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "redundancy must be positive, got {r}"
            )));
        }
        for &r in &self.r_values {
            let n = measurements_for(r, self.m);
            if n > self.budget {
                return Err(Error::BudgetExceeded {
                    n,
                    budget: self.budget,
                });
            }
            if n < 2 {
                return Err(Error::InvalidArgument(format!(
                    "R = {r} gives fewer than two measurements"
                )));
            }
        }
        Ok(())
    }
}

/// One realization: `value = log10(2 beta / sigma)`, infinite when the
/// ensemble has `sigma = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentPoint {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub trial: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RedundancySummary {
    #[serde(rename = "M")]
    pub m: usize,
    /// Requested redundancy.
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// `N / M`, at which the curves are evaluated.
    pub effective_r: f64,
    /// Mean over finite values; `None` when every trial had `sigma = 0`.
    pub mean: Option<f64>,
    pub finite_trials: usize,
    pub infinite_trials: usize,
    /// `log10 a(N / M, M)`, absent when `N / M <= 2`.
    pub log10_curve_a: Option<f64>,
    /// `log10 b(N / M)`, absent when `N / M <= 2`.
    pub log10_curve_b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianExperimentResult {
    pub config: GaussianExperimentConfig,
    pub points: Vec<ExperimentPoint>,
    pub summaries: Vec<RedundancySummary>,
}

/// Seed of trial `trial` at redundancy index `r_index`.
pub fn trial_seed(base_seed: u64, r_index: usize, trial: usize) -> u64 {
    derive_seed(base_seed, &[r_index as u64, trial as u64])
}

fn log10_stability(m: usize, n: usize, seed: u64, budget: usize) -> Result<f64> {
    let phi = gaussian_ensemble(m, n, seed)?;
    let sigma = scp_sigma(&phi, budget)?.sigma;
    if sigma == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((2.0 * operator_norm(&phi) / sigma).log10())
}

/// Draws `trials` Gaussian ensembles per redundancy and records
/// `log10(2 beta / sigma)` for each, with per-redundancy means and the two
/// reference curves. Trials run in parallel; every trial has its own seed,
/// and results are gathered in `(R, trial)` order.
pub fn run_gaussian_experiment(cfg: &GaussianExperimentConfig) -> Result<GaussianExperimentResult> {
    cfg.validate()?;
    let m = cfg.m;
    let jobs: Vec<(usize, usize)> = (0..cfg.r_values.len())
        .flat_map(|ri| (0..cfg.trials).map(move |t| (ri, t)))
        .collect();
    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&(ri, t)| {
            let n = measurements_for(cfg.r_values[ri], m);
            log10_stability(m, n, trial_seed(cfg.base_seed, ri, t), cfg.budget)
        })
        .collect::<Result<_>>()?;

    let points: Vec<ExperimentPoint> = jobs
        .iter()
        .zip(&values)
        .map(|(&(ri, t), &value)| ExperimentPoint {
            m,
            r: cfg.r_values[ri],
            n: measurements_for(cfg.r_values[ri], m),
            trial: t,
            value,
        })
        .collect();

    let summaries = cfg
        .r_values
        .iter()
        .enumerate()
        .map(|(ri, &r)| {
            let n = measurements_for(r, m);
            let effective_r = n as f64 / m as f64;
            let row = &values[ri * cfg.trials..(ri + 1) * cfg.trials];
            let finite: Vec<f64> = row.iter().copied().filter(|v| v.is_finite()).collect();
            let mean =
                (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64);
            RedundancySummary {
                m,
                r,
                n,
                effective_r,
                mean,
                finite_trials: finite.len(),
                infinite_trials: row.len() - finite.len(),
                log10_curve_a: curve_a(effective_r, m).ok().map(f64::log10),
                log10_curve_b: curve_b(effective_r).ok().map(f64::log10),
            }
        })
        .collect();

    Ok(GaussianExperimentResult {
        config: cfg.clone(),
        points,
        summaries,
    })
}

/// Seventeen significant digits; infinities as `inf`, absent values empty.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// Writes `M,R,trial,log10_value` rows.
pub fn write_points_csv<W: Write>(result: &GaussianExperimentResult, mut out: W) -> Result<()> {
    writeln!(out, "{POINTS_HEADER}")?;
    for p in &result.points {
        writeln!(
            out,
            "{},{},{},{}",
            p.m,
            format_float(p.r),
            p.trial,
            format_float(p.value)
        )?;
    }
    Ok(())
}

/// Writes `M,R,mean,curve_a,curve_b` rows; the curve columns hold `log10`
/// of the curves so they share units with the means.
pub fn write_summary_csv<W: Write>(result: &GaussianExperimentResult, mut out: W) -> Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for s in &result.summaries {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.m,
            format_float(s.r),
            format_opt(s.mean),
            format_opt(s.log10_curve_a),
            format_opt(s.log10_curve_b)
        )?;
    }
    Ok(())
}
