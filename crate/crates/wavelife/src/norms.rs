//! Discrete realizations of the weighted norm framework: the interior
//! weighted sup-norm, the exterior sup-norm, derivative energy norms,
//! their sum D_{S,T}, the decay weight p, and the smallness functional
//! R(E,T) together with the empirical contraction probe.

use serde::{Deserialize, Serialize};

use crate::linear_kernel::{ConeMask, Region};
use crate::model::{diff_t, diff_x, Field};
use crate::rational::{Rational, RationalError};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NormError {
    #[error("orders out of range: need alpha+1 <= beta0 < 2 alpha, got ({alpha}, {beta0})")]
    OutOfRange { alpha: i64, beta0: i64 },
    #[error("contraction probe needs at least 3 runs, got {0}")]
    InsufficientRuns(usize),
    #[error("contraction probe refuses non-converged run at eps = {0}")]
    NonConvergedInput(f64),
    #[error(transparent)]
    Arithmetic(#[from] RationalError),
}

/// p = (2 alpha - beta0) / (beta0 (alpha + 1)), exact and positive on the
/// admissible order range.
pub fn weight_p(alpha: i64, beta0: i64) -> Result<Rational, NormError> {
    if alpha < 1 || beta0 < alpha + 1 || beta0 >= 2 * alpha {
        return Err(NormError::OutOfRange { alpha, beta0 });
    }
    let p = Rational::new(2 * alpha - beta0, beta0 * (alpha + 1))?;
    debug_assert!(p.is_positive());
    Ok(p)
}

/// R(E,T) = E^alpha (1+T)^{1+p} + E^beta0 (1+T)^{2 - beta0 p}.
pub fn capital_r(e: f64, t: f64, alpha: i64, beta0: i64) -> Result<f64, NormError> {
    let p = weight_p(alpha, beta0)?.to_f64();
    let one_plus_t = 1.0 + t;
    Ok(e.powi(alpha as i32) * one_plus_t.powf(1.0 + p)
        + e.powi(beta0 as i32) * one_plus_t.powf(2.0 - beta0 as f64 * p))
}

/// The positivity identity -(beta0+1) p + 1 = (beta0-alpha)(2+beta0) /
/// ((alpha+1) beta0), returned as an exact rational after asserting both
/// the equality and strict positivity.
pub fn positivity_identity_check(alpha: i64, beta0: i64) -> Result<Rational, NormError> {
    let p = weight_p(alpha, beta0)?;
    let lhs = Rational::from_int(1).checked_sub(Rational::from_int(beta0 + 1).checked_mul(p)?)?;
    let rhs = Rational::new((beta0 - alpha) * (2 + beta0), (alpha + 1) * beta0)?;
    assert_eq!(lhs, rhs, "positivity identity failed at ({alpha}, {beta0})");
    assert!(lhs.is_positive());
    Ok(lhs)
}

/// Discrete norms of one solution slab.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormReport {
    /// sup over D of (1+t+x)^p |u|, weight verbatim in x
    pub norm1: f64,
    /// same with the symmetrized weight (1+t+|x|)^p, reported alongside
    pub norm1_symmetrized: f64,
    /// sup over D' of |u|
    pub norm2: f64,
    /// time-sup of the order-k derivative energy sums, k = 0..=K
    pub energy_norms: Vec<f64>,
    /// norm1 + norm2 + time-sup of the summed energy norms
    pub d_st: f64,
    pub p_weight: Rational,
    /// R(d_st, t_horizon) for the contraction bookkeeping
    pub r_et: f64,
}

fn l2_row(u: &Field, i: usize) -> f64 {
    // trapezoid rule in x
    let row = u.row(i);
    let mut sum = 0.0;
    for j in 0..row.len() {
        let w = if j == 0 || j == row.len() - 1 {
            0.5
        } else {
            1.0
        };
        sum += w * row[j] * row[j];
    }
    (sum * u.grid.dx).sqrt()
}

/// Assemble the discrete norm report for a slab.
///
/// `derivative_cap` plays the role of the paper-side S, capped at 2: higher
/// centered differences of an O(dx^2) solution are noise.
pub fn norm_report(
    u: &Field,
    alpha: i64,
    beta0: i64,
    support_radius: f64,
    t_horizon: f64,
    derivative_cap: usize,
) -> Result<NormReport, NormError> {
    assert!(derivative_cap <= 2, "derivative cap must be <= 2");
    let p = weight_p(alpha, beta0)?;
    let pf = p.to_f64();
    let grid = u.grid;
    let horizon_row = ((t_horizon / grid.dt + 1e-9).floor() as usize).min(u.valid_up_to);

    let interior = ConeMask::new(grid, support_radius, Region::InteriorD);
    let exterior = ConeMask::new(grid, support_radius, Region::ExteriorDprime);
    let mut norm1 = 0.0f64;
    let mut norm1_sym = 0.0f64;
    let mut norm2 = 0.0f64;
    for i in 0..=horizon_row {
        let t = grid.t(i);
        for j in 0..grid.nx {
            let v = u.at(i, j).abs();
            if v == 0.0 {
                continue;
            }
            let x = grid.x(j);
            if interior.contains(i, j) {
                norm1 = norm1.max((1.0 + t + x).powf(pf) * v);
                norm1_sym = norm1_sym.max((1.0 + t + x.abs()).powf(pf) * v);
            } else if exterior.contains(i, j) {
                norm2 = norm2.max(v);
            }
        }
    }

    // Du = (u_t, u_x); energy order k applies k more derivatives to each
    // component. All mixed multi-indices of that order are summed.
    let ut = diff_t(u);
    let ux = diff_x(u);
    let first = [&ut, &ux];
    let mut per_order_rows: Vec<Vec<f64>> = Vec::new();
    for k in 0..=derivative_cap {
        let mut rows = vec![0.0; horizon_row + 1];
        for base in first {
            for kt in 0..=k {
                let kx = k - kt;
                let mut d = base.clone();
                for _ in 0..kt {
                    d = diff_t(&d);
                }
                for _ in 0..kx {
                    d = diff_x(&d);
                }
                for (i, slot) in rows.iter_mut().enumerate() {
                    *slot += l2_row(&d, i);
                }
            }
        }
        per_order_rows.push(rows);
    }
    let energy_norms: Vec<f64> = per_order_rows
        .iter()
        .map(|rows| rows.iter().cloned().fold(0.0, f64::max))
        .collect();
    let energy_sup = (0..=horizon_row)
        .map(|i| per_order_rows.iter().map(|rows| rows[i]).sum::<f64>())
        .fold(0.0, f64::max);

    let d_st = norm1 + norm2 + energy_sup;
    let r_et = capital_r(d_st, t_horizon, alpha, beta0)?;
    Ok(NormReport {
        norm1,
        norm1_symmetrized: norm1_sym,
        norm2,
        energy_norms,
        d_st,
        p_weight: p,
        r_et,
    })
}

/// One Picard run's bookkeeping for the contraction probe: the smallness
/// data (eps, E, T) and the D_{S,T} values of successive iterates.
#[derive(Debug, Clone)]
pub struct ContractionRun {
    pub eps: f64,
    pub e_bound: f64,
    pub t_horizon: f64,
    pub r_et: f64,
    /// D_{S,T}(u_k) for k = 0, 1, ...
    pub iterate_norms: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionProbe {
    /// smallest C with D(u_{k+1}) <= C (eps + (R + sqrt(R))(E + D(u_k)))
    /// across every supplied run and iterate pair
    pub fitted_c: f64,
    pub per_run_c: Vec<f64>,
    /// max/min of the per-run constants <= 10
    pub stable: bool,
}

pub fn contraction_probe(runs: &[ContractionRun]) -> Result<ContractionProbe, NormError> {
    if runs.len() < 3 {
        return Err(NormError::InsufficientRuns(runs.len()));
    }
    let mut per_run_c = Vec::with_capacity(runs.len());
    for run in runs {
        if !run.converged {
            return Err(NormError::NonConvergedInput(run.eps));
        }
        let smallness = run.r_et + run.r_et.sqrt();
        let mut c = 0.0f64;
        for pair in run.iterate_norms.windows(2) {
            let bound = run.eps + smallness * (run.e_bound + pair[0]);
            if bound > 0.0 {
                c = c.max(pair[1] / bound);
            }
        }
        per_run_c.push(c);
    }
    let fitted_c = per_run_c.iter().cloned().fold(0.0, f64::max);
    let min_c = per_run_c.iter().cloned().fold(f64::INFINITY, f64::min);
    let stable = min_c > 0.0 && fitted_c / min_c <= 10.0;
    Ok(ContractionProbe {
        fitted_c,
        per_run_c,
        stable,
    })
}
