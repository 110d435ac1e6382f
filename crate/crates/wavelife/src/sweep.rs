//! Epsilon sweep orchestration: one lifespan record per epsilon, a
//! log-log least-squares fit of the scaling exponent, a verdict against
//! the theoretical prediction, and result files for external plotting.

use crate::lifespan::{estimate_lifespan, LifespanBudget, LifespanError, LifespanRecord};
use crate::model::{InitialData, NonlinearitySpec};
use crate::rational::Rational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("need >= 3 points with positive distinct eps and positive T")]
    DegenerateInput,
    #[error("only {0} trusted records, need >= 3")]
    TooFewTrusted(usize),
    #[error("eps range must be geometric with >= 5 points")]
    BadEpsRange,
    #[error(transparent)]
    Lifespan(#[from] LifespanError),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Consistent,
    Inconclusive,
    Inconsistent,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub eps_max: f64,
    /// geometric ratio between consecutive eps values
    pub eps_ratio: f64,
    pub n_points: usize,
    pub budget: LifespanBudget,
    pub verdict_tol: f64,
    /// plants T = eps^{-s} instead of running the solver
    pub synthetic_exponent: Option<f64>,
}

impl SweepConfig {
    pub fn new(eps_max: f64, budget: LifespanBudget) -> SweepConfig {
        SweepConfig {
            eps_max,
            eps_ratio: 0.8,
            n_points: 8,
            budget,
            verdict_tol: 0.20,
            synthetic_exponent: None,
        }
    }

    pub fn eps_values(&self) -> Vec<f64> {
        (0..self.n_points)
            .map(|k| self.eps_max * self.eps_ratio.powi(k as i32))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec_summary: String,
    pub eps_values: Vec<f64>,
    pub records: Vec<LifespanRecord>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub predicted_exponent: Rational,
    pub verdict: Verdict,
}

/// Ordinary least squares of log T against log(1/eps).
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<(f64, f64, f64), SweepError> {
    if points.len() < 3 {
        return Err(SweepError::DegenerateInput);
    }
    if points.iter().any(|&(e, t)| e <= 0.0 || t <= 0.0) {
        return Err(SweepError::DegenerateInput);
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(e, _)| -e.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, t)| t.ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SweepError::DegenerateInput);
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let sst: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let r_squared = if sst == 0.0 { 1.0 } else { 1.0 - sse / sst };
    let stderr = (sse / (n - 2.0) / sxx).max(0.0).sqrt();
    Ok((slope, stderr, r_squared))
}

fn verdict(
    slope: f64,
    r_squared: f64,
    predicted: f64,
    verdict_tol: f64,
    trusted_eps: &[f64],
) -> Verdict {
    let consistent = (slope - predicted).abs() / predicted <= verdict_tol && r_squared >= 0.98;
    if consistent {
        return Verdict::Consistent;
    }
    // desk-scale guard: too few points or less than a decade of eps cannot
    // responsibly contradict an asymptotic statement
    let span = trusted_eps.iter().cloned().fold(f64::MIN, f64::max)
        / trusted_eps.iter().cloned().fold(f64::MAX, f64::min);
    if trusted_eps.len() < 5 || span < 10.0 {
        Verdict::Inconclusive
    } else {
        Verdict::Inconsistent
    }
}

fn synthetic_record(eps: f64, s: f64, budget: &LifespanBudget) -> LifespanRecord {
    let t = eps.powf(-s);
    let levels = (0..budget.levels.max(2))
        .map(|k| (budget.dx0 / 2f64.powi(k as i32), t))
        .collect();
    LifespanRecord {
        eps,
        levels,
        extrapolated_t: t,
        rel_spread: 0.0,
        trusted: true,
        censored: false,
    }
}

pub fn run_sweep(
    spec: &NonlinearitySpec,
    data: &InitialData,
    spec_summary: &str,
    predicted_exponent: Rational,
    config: &SweepConfig,
) -> Result<SweepResult, SweepError> {
    if config.n_points < 5 || config.eps_ratio <= 0.0 || config.eps_ratio >= 1.0 {
        return Err(SweepError::BadEpsRange);
    }
    let eps_values = config.eps_values();
    let records: Vec<LifespanRecord> = if let Some(s) = config.synthetic_exponent {
        eps_values
            .iter()
            .map(|&eps| synthetic_record(eps, s, &config.budget))
            .collect()
    } else {
        eps_values
            .par_iter()
            .map(|&eps| estimate_lifespan(spec, data, eps, &config.budget))
            .collect::<Result<_, _>>()?
    };
    let trusted: Vec<&LifespanRecord> = records.iter().filter(|r| r.trusted).collect();
    if trusted.len() < 3 {
        return Err(SweepError::TooFewTrusted(trusted.len()));
    }
    let points: Vec<(f64, f64)> = trusted.iter().map(|r| (r.eps, r.extrapolated_t)).collect();
    let (fitted_slope, slope_stderr, r_squared) = fit_exponent(&points)?;
    let trusted_eps: Vec<f64> = trusted.iter().map(|r| r.eps).collect();
    let verdict = verdict(
        fitted_slope,
        r_squared,
        predicted_exponent.to_f64(),
        config.verdict_tol,
        &trusted_eps,
    );
    Ok(SweepResult {
        spec_summary: spec_summary.to_string(),
        eps_values,
        records,
        fitted_slope,
        slope_stderr,
        r_squared,
        predicted_exponent,
        verdict,
    })
}

/// Write sweep.csv, sweep.json, sweep.dat into `dir`.
pub fn write_outputs(result: &SweepResult, dir: &Path) -> Result<(), SweepError> {
    std::fs::create_dir_all(dir)?;

    let mut csv = std::fs::File::create(dir.join("sweep.csv"))?;
    writeln!(csv, "eps,dx_finest,T_detected,T_extrapolated,trusted")?;
    for r in &result.records {
        let (dx_finest, t_detected) = *r.levels.last().expect("record has levels");
        writeln!(
            csv,
            "{:.17e},{:.17e},{:.17e},{:.17e},{}",
            r.eps, dx_finest, t_detected, r.extrapolated_t, r.trusted
        )?;
    }

    let json = serde_json::to_string_pretty(result).expect("serializable");
    std::fs::write(dir.join("sweep.json"), json)?;

    let mut dat = std::fs::File::create(dir.join("sweep.dat"))?;
    writeln!(dat, "# log(1/eps)  log(T_extrapolated), trusted records")?;
    for r in result.records.iter().filter(|r| r.trusted) {
        writeln!(dat, "{:.17e} {:.17e}", -r.eps.ln(), r.extrapolated_t.ln())?;
    }
    Ok(())
}
