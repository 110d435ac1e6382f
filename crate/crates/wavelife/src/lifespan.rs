//! Numerical lifespan estimation: run the finite-difference scheme at a
//! ladder of grid spacings, detect the threshold-exit time at each level,
//! and Richardson-extrapolate to a grid-independent estimate.

use crate::fd_solver::{default_blowup_threshold, fd_blowup_scan, FdError};
use crate::model::{Grid, InitialData, NonlinearitySpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum LifespanError {
    #[error("need at least 2 refinement levels, got {0}")]
    TooFewLevels(usize),
    #[error("coarsest run could not finish: {0}")]
    BudgetExhausted(FdError),
}

/// Lifespan estimate for one epsilon, assembled from a refinement ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LifespanRecord {
    pub eps: f64,
    /// (dx, detected_T) ordered by decreasing dx
    pub levels: Vec<(f64, f64)>,
    pub extrapolated_t: f64,
    pub rel_spread: f64,
    pub trusted: bool,
    /// true when no level exited the threshold within the time budget;
    /// detected times then equal the budget and are lower bounds only
    pub censored: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LifespanBudget {
    /// coarsest spacing; level k runs at dx0 / 2^k
    pub dx0: f64,
    pub courant_ratio: f64,
    /// time budget per run; runs reaching it without exit are censored
    pub t_budget: f64,
    pub levels: usize,
    pub trust_tol: f64,
    /// overrides the scale-free default 1e3 * sup |eps u0| when set
    pub blowup_threshold: Option<f64>,
}

impl LifespanBudget {
    pub fn new(dx0: f64, t_budget: f64) -> LifespanBudget {
        LifespanBudget {
            dx0,
            courant_ratio: 0.5,
            t_budget,
            levels: 3,
            trust_tol: 0.05,
            blowup_threshold: None,
        }
    }
}

/// Richardson extrapolation over (dx, T) pairs ordered by decreasing dx.
/// With 3+ levels the observed order q = log2((T1-T2)/(T2-T3)) is used,
/// falling back to q = 2 when the differences do not behave; with 2 levels
/// q = 2 is assumed.
pub fn richardson(levels: &[(f64, f64)]) -> f64 {
    let n = levels.len();
    assert!(n >= 2);
    let t_fine = levels[n - 1].1;
    let t_next = levels[n - 2].1;
    let q = if n >= 3 {
        let d_coarse = levels[n - 3].1 - t_next;
        let d_fine = t_next - t_fine;
        let ratio = d_coarse / d_fine;
        if ratio.is_finite() && ratio > 1.0 {
            ratio.log2().clamp(0.5, 4.0)
        } else {
            2.0
        }
    } else {
        2.0
    };
    t_fine + (t_fine - t_next) / (2f64.powf(q) - 1.0)
}

/// Run fd_blowup_scan at dx0, dx0/2, ... and extrapolate the exit time.
pub fn estimate_lifespan(
    spec: &NonlinearitySpec,
    data: &InitialData,
    eps: f64,
    budget: &LifespanBudget,
) -> Result<LifespanRecord, LifespanError> {
    if budget.levels < 2 {
        return Err(LifespanError::TooFewLevels(budget.levels));
    }
    let threshold = budget
        .blowup_threshold
        .unwrap_or_else(|| default_blowup_threshold(data, eps));
    let dxs: Vec<f64> = (0..budget.levels)
        .map(|k| budget.dx0 / 2f64.powi(k as i32))
        .collect();
    let outcomes: Vec<Result<Option<f64>, FdError>> = dxs
        .par_iter()
        .map(|&dx| {
            let grid = Grid::cover(
                dx,
                budget.courant_ratio,
                budget.t_budget,
                data.support_radius,
            );
            fd_blowup_scan(spec, data, eps, grid, threshold)
        })
        .collect();
    let mut levels = Vec::with_capacity(budget.levels);
    let mut censored = false;
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(Some(t)) => levels.push((dxs[k], t)),
            Ok(None) => {
                levels.push((dxs[k], budget.t_budget));
                censored = true;
            }
            Err(e) => {
                if k == 0 {
                    return Err(LifespanError::BudgetExhausted(e));
                }
                // a finer level failing mid-run (e.g. hyperbolicity loss at
                // the singularity) counts as exit at the reported time
                let t = match e {
                    FdError::CflViolation { t, .. } => t,
                    FdError::HyperbolicityLoss { t, .. } => t,
                };
                levels.push((dxs[k], t));
            }
        }
    }
    let extrapolated_t = if censored {
        budget.t_budget
    } else {
        richardson(&levels)
    };
    let t_fine = levels[levels.len() - 1].1;
    let t_next = levels[levels.len() - 2].1;
    let rel_spread = (t_fine - t_next).abs() / t_fine;
    let trusted = !censored && rel_spread <= budget.trust_tol;
    Ok(LifespanRecord {
        eps,
        levels,
        extrapolated_t,
        rel_spread,
        trusted,
        censored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{classify, Monomial, Profile};

    fn combined_spec() -> NonlinearitySpec {
        let ut3 = Monomial {
            coeff: 1.0,
            a: 0,
            b: 3,
            d: 0,
            abs_u: false,
            abs_ut: true,
            abs_ux: false,
        };
        let u4 = Monomial {
            coeff: 1.0,
            a: 4,
            b: 0,
            d: 0,
            abs_u: true,
            abs_ut: false,
            abs_ux: false,
        };
        classify(&[ut3, u4], &[], &[]).unwrap()
    }

    fn blowup_data() -> InitialData {
        InitialData::new(
            Profile::Bump { amplitude: 2.0 },
            Profile::BumpDerivative { amplitude: 2.0 },
            1.0,
        )
    }

    #[test]
    fn richardson_recovers_planted_quadratic() {
        let t_star = 3.71;
        let c = 1.3;
        for q in [2.0f64, 1.6, 2.4] {
            let levels: Vec<(f64, f64)> = [0.2f64, 0.1, 0.05]
                .iter()
                .map(|&dx| (dx, t_star + c * dx.powf(q)))
                .collect();
            let got = richardson(&levels);
            assert!(
                (got - t_star).abs() < 1e-10,
                "q {q}: got {got}, want {t_star}"
            );
        }
    }

    #[test]
    fn richardson_two_levels_assumes_second_order() {
        let t_star = 2.0;
        let levels = [(0.1, t_star + 0.04), (0.05, t_star + 0.01)];
        assert!((richardson(&levels) - t_star).abs() < 1e-12);
    }

    #[test]
    fn linear_run_is_censored_at_budget() {
        let mut spec = combined_spec();
        spec.f_terms.clear();
        let data = blowup_data();
        let budget = LifespanBudget {
            levels: 2,
            ..LifespanBudget::new(0.1, 3.0)
        };
        let record = estimate_lifespan(&spec, &data, 0.5, &budget).unwrap();
        assert!(record.censored);
        assert!(!record.trusted);
        for &(_, t) in &record.levels {
            assert_eq!(t, budget.t_budget);
        }
        assert_eq!(record.extrapolated_t, budget.t_budget);
    }

    #[test]
    fn too_few_levels_is_an_error() {
        let spec = combined_spec();
        let data = blowup_data();
        let budget = LifespanBudget {
            levels: 1,
            ..LifespanBudget::new(0.1, 2.0)
        };
        assert!(matches!(
            estimate_lifespan(&spec, &data, 0.5, &budget),
            Err(LifespanError::TooFewLevels(1))
        ));
    }

    #[test]
    fn refinement_study_stabilizes() {
        let spec = combined_spec();
        let data = blowup_data();
        let budget = LifespanBudget::new(0.08, 8.0);
        let record = estimate_lifespan(&spec, &data, 0.6, &budget).unwrap();
        assert!(!record.censored, "levels {:?}", record.levels);
        assert!(
            record.trusted,
            "rel_spread {} levels {:?}",
            record.rel_spread, record.levels
        );
        assert!(record.rel_spread <= 0.05);
        // detected times ordered by decreasing dx and all below budget
        for w in record.levels.windows(2) {
            assert!(w[1].0 < w[0].0);
        }
        assert!(record.extrapolated_t < budget.t_budget);
    }

    #[test]
    fn lifespan_grows_as_eps_shrinks() {
        let spec = combined_spec();
        let data = blowup_data();
        let budget = LifespanBudget {
            levels: 2,
            ..LifespanBudget::new(0.08, 12.0)
        };
        let t_large = estimate_lifespan(&spec, &data, 0.7, &budget).unwrap();
        let t_small = estimate_lifespan(&spec, &data, 0.5, &budget).unwrap();
        assert!(!t_large.censored && !t_small.censored);
        assert!(t_small.extrapolated_t > t_large.extrapolated_t);
    }

    #[test]
    fn raising_threshold_never_decreases_detected_time() {
        let spec = combined_spec();
        let data = blowup_data();
        let eps = 0.6;
        let grid = Grid::cover(0.08, 0.5, 8.0, 1.0);
        let lo = fd_blowup_scan(&spec, &data, eps, grid, 1e2)
            .unwrap()
            .unwrap();
        let hi = fd_blowup_scan(&spec, &data, eps, grid, 1e4)
            .unwrap()
            .unwrap();
        assert!(hi >= lo, "hi {hi} lo {lo}");
    }
}
