//! Prospective propensity scores, adaptive ratios, adaptation sets and
//! moving marginal expectations.
//!
//! Conventions: at time `t`, `treatments` is `a_1..a_t`, `previous` is
//! `y_1..y_{t-1}`, and `future` is `a_{t+1}..a_T`.

use crate::dgp::FiniteDgp;
use crate::error::OracleError;
use crate::exact::{check_treatments, expected_final};

/// `|s - 1|` at or below this counts as neutral.
pub const NEUTRAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lag {
    /// Conditions on `y_1..y_t`.
    Zero,
    /// Conditions on `y_1..y_{t-1}`.
    One,
}

/// Outcome indices of the support of `p_t(. | history)`, split by the
/// adaptive ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationPartition {
    pub upweighted: Vec<usize>,
    pub neutral: Vec<usize>,
    pub downweighted: Vec<usize>,
    /// `(y_t, s_t(y_t))` over the support, in outcome order.
    pub ratios: Vec<(usize, f64)>,
}

impl AdaptationPartition {
    /// Some supported outcome has `|s - 1|` above the tolerance.
    pub fn is_nonconstant(&self) -> bool {
        !(self.upweighted.is_empty() && self.downweighted.is_empty())
    }
}

/// `P(a_{t+1}..a_T | a_1..a_t, y_1..y_t)` straight from the kernels.
pub(crate) fn future_given(
    dgp: &FiniteDgp,
    treatments: &mut Vec<usize>,
    outcomes: &mut Vec<usize>,
    future: &[usize],
) -> f64 {
    let Some((&next, rest)) = future.split_first() else {
        return 1.0;
    };
    let pa = dgp.rule_prob(treatments, outcomes, next);
    if pa == 0.0 || rest.is_empty() {
        // y_T does not influence any treatment
        return pa;
    }
    treatments.push(next);
    let mut acc = 0.0;
    for y in 0..dgp.outcome_levels() {
        let py = dgp.outcome_prob(treatments, outcomes, y);
        if py == 0.0 {
            continue;
        }
        outcomes.push(y);
        acc += py * future_given(dgp, treatments, outcomes, rest);
        outcomes.pop();
    }
    treatments.pop();
    pa * acc
}

/// Lag-1 score `P(a_{t+1}..a_T | a_1..a_t, y_1..y_{t-1})`.
pub(crate) fn lag1_raw(
    dgp: &FiniteDgp,
    treatments: &[usize],
    previous: &[usize],
    future: &[usize],
) -> f64 {
    let mut a = treatments.to_vec();
    let mut y = previous.to_vec();
    let mut acc = 0.0;
    for next in 0..dgp.outcome_levels() {
        let py = dgp.outcome_prob(&a, &y, next);
        if py == 0.0 {
            continue;
        }
        y.push(next);
        acc += py * future_given(dgp, &mut a, &mut y, future);
        y.pop();
    }
    acc
}

pub(crate) fn lag0_raw(
    dgp: &FiniteDgp,
    treatments: &[usize],
    outcomes: &[usize],
    future: &[usize],
) -> f64 {
    future_given(
        dgp,
        &mut treatments.to_vec(),
        &mut outcomes.to_vec(),
        future,
    )
}

/// Joint probability of `a_1..a_t` and the outcomes `y_1..y_{outcomes.len()}`
/// under the rule, where `outcomes.len()` is `t` or `t - 1`.
pub fn history_probability(dgp: &FiniteDgp, treatments: &[usize], outcomes: &[usize]) -> f64 {
    let mut prob = 1.0;
    for s in 0..treatments.len() {
        prob *= dgp.rule_prob(&treatments[..s], &outcomes[..s], treatments[s]);
        if s < outcomes.len() {
            prob *= dgp.outcome_prob(&treatments[..=s], &outcomes[..s], outcomes[s]);
        }
        if prob == 0.0 {
            break;
        }
    }
    prob
}

fn check_time(
    dgp: &FiniteDgp,
    treatments: &[usize],
    future: &[usize],
    min_t: usize,
) -> Result<usize, OracleError> {
    let t = treatments.len();
    if t < min_t || t + future.len() != dgp.horizon() {
        return Err(OracleError::InvalidArgument(format!(
            "history of {t} treatments and a future of {} do not fit horizon {}",
            future.len(),
            dgp.horizon()
        )));
    }
    check_treatments(dgp, treatments)?;
    check_treatments(dgp, future)?;
    Ok(t)
}

fn check_outcomes(dgp: &FiniteDgp, outcomes: &[usize], expected: usize) -> Result<(), OracleError> {
    if outcomes.len() != expected {
        return Err(OracleError::InvalidArgument(format!(
            "expected {expected} outcomes, got {}",
            outcomes.len()
        )));
    }
    if let Some(y) = outcomes.iter().find(|&&y| y >= dgp.outcome_levels()) {
        return Err(OracleError::InvalidArgument(format!(
            "outcome index {y} is outside 0..{}",
            dgp.outcome_levels()
        )));
    }
    Ok(())
}

/// Probability of the remaining treatments `future` given the history.
///
/// For [`Lag::Zero`] `outcomes` is `y_1..y_t`; for [`Lag::One`] it is
/// `y_1..y_{t-1}` and `y_t` is marginalized. Fails when the conditioning
/// history has probability zero under the joint law.
pub fn prospective_propensity(
    dgp: &FiniteDgp,
    lag: Lag,
    treatments: &[usize],
    outcomes: &[usize],
    future: &[usize],
) -> Result<f64, OracleError> {
    let min_t = if lag == Lag::One { 1 } else { 0 };
    let t = check_time(dgp, treatments, future, min_t)?;
    let expected = if lag == Lag::Zero { t } else { t - 1 };
    check_outcomes(dgp, outcomes, expected)?;
    if history_probability(dgp, treatments, outcomes) == 0.0 {
        return Err(OracleError::UndefinedConditional(format!(
            "history (a={treatments:?}, y={outcomes:?})"
        )));
    }
    Ok(match lag {
        Lag::Zero => lag0_raw(dgp, treatments, outcomes, future),
        Lag::One => lag1_raw(dgp, treatments, outcomes, future),
    })
}

/// `s_t(y_t)`: lag-0 over lag-1 propensity of `future`.
pub fn adaptive_ratio(
    dgp: &FiniteDgp,
    treatments: &[usize],
    previous: &[usize],
    y: usize,
    future: &[usize],
) -> Result<f64, OracleError> {
    let t = check_time(dgp, treatments, future, 1)?;
    check_outcomes(dgp, previous, t - 1)?;
    check_outcomes(dgp, &[y], 1)?;
    let denominator = lag1_raw(dgp, treatments, previous, future);
    if denominator == 0.0 {
        return Err(OracleError::UndefinedRatio { t });
    }
    let mut outcomes = previous.to_vec();
    outcomes.push(y);
    Ok(lag0_raw(dgp, treatments, &outcomes, future) / denominator)
}

/// Splits the support of `p_t(. | a_1..a_t, y_1..y_{t-1})` into
/// upweighted, neutral and downweighted outcomes.
pub fn classify_adaptations(
    dgp: &FiniteDgp,
    treatments: &[usize],
    previous: &[usize],
    future: &[usize],
) -> Result<AdaptationPartition, OracleError> {
    let t = check_time(dgp, treatments, future, 1)?;
    check_outcomes(dgp, previous, t - 1)?;
    let denominator = lag1_raw(dgp, treatments, previous, future);
    if denominator == 0.0 {
        return Err(OracleError::UndefinedRatio { t });
    }
    let mut partition = AdaptationPartition {
        upweighted: Vec::new(),
        neutral: Vec::new(),
        downweighted: Vec::new(),
        ratios: Vec::new(),
    };
    let mut outcomes = previous.to_vec();
    for y in 0..dgp.outcome_levels() {
        if dgp.outcome_prob(treatments, previous, y) == 0.0 {
            continue;
        }
        outcomes.push(y);
        let s = lag0_raw(dgp, treatments, &outcomes, future) / denominator;
        outcomes.pop();
        partition.ratios.push((y, s));
        if s > 1.0 + NEUTRAL_TOLERANCE {
            partition.upweighted.push(y);
        } else if s < 1.0 - NEUTRAL_TOLERANCE {
            partition.downweighted.push(y);
        } else {
            partition.neutral.push(y);
        }
    }
    Ok(partition)
}

/// `f_{T,t}(y_t)`: expected final outcome after `y_t` with the remaining
/// treatments forced to `future`.
pub fn moving_marginal_expectation(
    dgp: &FiniteDgp,
    treatments: &[usize],
    previous: &[usize],
    y: usize,
    future: &[usize],
) -> Result<f64, OracleError> {
    let t = check_time(dgp, treatments, future, 1)?;
    check_outcomes(dgp, previous, t - 1)?;
    check_outcomes(dgp, &[y], 1)?;
    let mut outcomes = previous.to_vec();
    outcomes.push(y);
    Ok(expected_final(
        dgp,
        &mut treatments.to_vec(),
        &mut outcomes,
        future,
    ))
}
