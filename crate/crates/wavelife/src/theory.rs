//! Exact lifespan exponent calculus: the general-theory table, the
//! combined-effect bound, the improved combined exponent and the margin
//! between them. Everything here is rational arithmetic; no floats.

use serde::{Deserialize, Serialize};

use crate::rational::{Rational, RationalError};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TheoryError {
    #[error("invalid orders: alpha = {alpha}, beta0 = {beta0:?}")]
    InvalidOrders { alpha: i64, beta0: Option<i64> },
    #[error("combined-effect condition (r+1)/2 < p+q < r violated for (p,q,r) = ({p},{q},{r})")]
    ConditionViolated { p: i64, q: i64, r: i64 },
    #[error(transparent)]
    Arithmetic(#[from] RationalError),
}

/// Which line of the lifespan table produced the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    General,
    ZeroMean,
    VanishingOrders,
    CombinedImproved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanPrediction {
    pub exponent: Rational,
    pub regime: Regime,
    pub conditions_used: Vec<String>,
}

fn rat(n: i64, d: i64) -> Result<Rational, TheoryError> {
    Ok(Rational::new(n, d)?)
}

/// The admissibility window for the improved exponent:
/// alpha + 1 <= beta0 < 2 alpha.
pub fn beta0_in_range(alpha: i64, beta0: i64) -> bool {
    alpha < beta0 && beta0 < 2 * alpha
}

/// Best applicable lower-bound exponent s in T(eps) >= C eps^{-s}.
///
/// Candidates: alpha/2 in general; alpha(alpha+1)/(alpha+2) for zero-mean
/// g; min{beta0/2, alpha} when pure-u derivatives vanish up to beta0;
/// (alpha+1) beta0 / (beta0+2) when both conditions hold and beta0 < 2 alpha.
/// The maximum wins, ties breaking toward the combined-improved regime.
pub fn predict(
    alpha: i64,
    beta0: Option<i64>,
    zero_mean: bool,
) -> Result<LifespanPrediction, TheoryError> {
    if alpha < 1 || beta0.is_some_and(|b0| b0 < alpha + 1) {
        return Err(TheoryError::InvalidOrders { alpha, beta0 });
    }
    let mut candidates: Vec<(Rational, Regime, Vec<String>)> = Vec::new();
    candidates.push((rat(alpha, 2)?, Regime::General, vec![]));
    if zero_mean {
        candidates.push((
            rat(alpha * (alpha + 1), alpha + 2)?,
            Regime::ZeroMean,
            vec!["zero-mean g".to_string()],
        ));
    }
    if let Some(b0) = beta0 {
        let vanishing = rat(b0, 2)?.min(rat(alpha, 1)?);
        candidates.push((
            vanishing,
            Regime::VanishingOrders,
            vec![format!("pure-u derivatives vanish up to order {b0}")],
        ));
        if zero_mean && beta0_in_range(alpha, b0) {
            candidates.push((
                rat((alpha + 1) * b0, b0 + 2)?,
                Regime::CombinedImproved,
                vec![
                    "zero-mean g".to_string(),
                    format!("pure-u derivatives vanish up to order {b0}"),
                    format!("alpha+1 <= beta0 = {b0} < 2 alpha"),
                ],
            ));
        }
    }
    // stable max: later entries win ties, and CombinedImproved is pushed last
    let best = candidates
        .into_iter()
        .reduce(|acc, c| if c.0 >= acc.0 { c } else { acc })
        .unwrap();
    Ok(LifespanPrediction {
        exponent: best.0,
        regime: best.1,
        conditions_used: best.2,
    })
}

/// Combined-effect exponent (p+q)(r-1)/(r+1) for the nonlinearity
/// u^p u_t^q + u^r, valid under (r+1)/2 < p+q < r.
pub fn combined_exponent(p: i64, q: i64, r: i64) -> Result<Rational, TheoryError> {
    // q = 1 is admitted: the u^2 u_t + u^4 model case has (p,q,r) = (2,1,4)
    if p < 2 || q < 1 || r < 2 {
        return Err(TheoryError::ConditionViolated { p, q, r });
    }
    // (r+1)/2 < p+q  <=>  r + 1 < 2(p+q)
    if !(r + 1 < 2 * (p + q) && p + q < r) {
        return Err(TheoryError::ConditionViolated { p, q, r });
    }
    Ok(Rational::new((p + q) * (r - 1), r + 1)?)
}

/// How much the improved exponent beats the best of the general table:
/// (alpha+1) beta0/(beta0+2) - max{alpha(alpha+1)/(alpha+2), beta0/2}.
/// Nonnegative throughout the admissible range.
pub fn improvement_margin(alpha: i64, beta0: i64) -> Result<Rational, TheoryError> {
    if alpha < 1 || !beta0_in_range(alpha, beta0) {
        return Err(TheoryError::InvalidOrders {
            alpha,
            beta0: Some(beta0),
        });
    }
    let improved = rat((alpha + 1) * beta0, beta0 + 2)?;
    let general = rat(alpha * (alpha + 1), alpha + 2)?.max(rat(beta0, 2)?);
    Ok(improved.checked_sub(general)?)
}

/// Sweep horizon T_eps = c * eps^{-(alpha+1) beta0/(beta0+2)} - 1, floored at 0.
pub fn horizon(c: f64, eps: f64, alpha: i64, beta0: i64) -> f64 {
    let s = (alpha + 1) as f64 * beta0 as f64 / (beta0 + 2) as f64;
    (c * eps.powf(-s) - 1.0).max(0.0)
}
