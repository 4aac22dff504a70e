//! Numerical residuals of the identities behind the bias decomposition.

use std::collections::HashMap;

use crate::dgp::{odometer, FiniteDgp};
use crate::error::OracleError;
use crate::exact::{associational_exact, check_target, enumerate_paths, target_probability};
use crate::propensity::{lag0_raw, lag1_raw};

/// `sum_y (s_t(y) - 1) p_t(y | history)`, which is zero whenever the lag-1
/// propensity is positive.
pub fn zero_mean_residual(
    dgp: &FiniteDgp,
    treatments: &[usize],
    previous: &[usize],
    future: &[usize],
) -> Result<f64, OracleError> {
    let t = treatments.len();
    let denominator = lag1_raw(dgp, treatments, previous, future);
    if denominator == 0.0 {
        return Err(OracleError::UndefinedRatio { t });
    }
    let mut outcomes = previous.to_vec();
    let mut acc = 0.0;
    for y in 0..dgp.outcome_levels() {
        let p = dgp.outcome_prob(treatments, previous, y);
        if p == 0.0 {
            continue;
        }
        outcomes.push(y);
        let s = lag0_raw(dgp, treatments, &outcomes, future) / denominator;
        outcomes.pop();
        acc += (s - 1.0) * p;
    }
    Ok(acc)
}

/// Largest `|zero_mean_residual|` over every `t = 1..T-1`, treatment
/// history, outcome history and future with positive lag-1 propensity.
pub fn max_zero_mean_residual(dgp: &FiniteDgp) -> f64 {
    let horizon = dgp.horizon();
    let (k, m) = (dgp.treatment_levels(), dgp.outcome_levels());
    let mut worst = 0.0f64;
    for t in 1..horizon {
        for treatments in odometer(&vec![k; t]) {
            for previous in odometer(&vec![m; t - 1]) {
                for future in odometer(&vec![k; horizon - t]) {
                    if let Ok(r) = zero_mean_residual(dgp, &treatments, &previous, &future) {
                        worst = worst.max(r.abs());
                    }
                }
            }
        }
    }
    worst
}

/// The associational quantity rebuilt as
/// `sum over y_1..y_T of y_T p_T prod_{t<T} s_t p_t`.
pub fn decomposition_value(dgp: &FiniteDgp, target: &[usize]) -> Result<f64, OracleError> {
    check_target(dgp, target)?;
    fn walk(
        dgp: &FiniteDgp,
        target: &[usize],
        outcomes: &mut Vec<usize>,
    ) -> Result<f64, OracleError> {
        let t = outcomes.len() + 1;
        let treatments = &target[..t];
        if t == target.len() {
            let mut acc = 0.0;
            for y in 0..dgp.outcome_levels() {
                acc += dgp.value(y) * dgp.outcome_prob(treatments, outcomes, y);
            }
            return Ok(acc);
        }
        let future = &target[t..];
        let denominator = lag1_raw(dgp, treatments, outcomes, future);
        if denominator == 0.0 {
            return Err(OracleError::UndefinedRatio { t });
        }
        let mut acc = 0.0;
        for y in 0..dgp.outcome_levels() {
            let p = dgp.outcome_prob(treatments, outcomes, y);
            if p == 0.0 {
                continue;
            }
            outcomes.push(y);
            let s = lag0_raw(dgp, treatments, outcomes, future) / denominator;
            if s > 0.0 {
                acc += s * p * walk(dgp, target, outcomes)?;
            }
            outcomes.pop();
        }
        Ok(acc)
    }
    walk(dgp, target, &mut Vec::new())
}

pub fn decomposition_residual(dgp: &FiniteDgp, target: &[usize]) -> Result<f64, OracleError> {
    Ok((decomposition_value(dgp, target)? - associational_exact(dgp, target)?).abs())
}

/// Largest gap between `p_t(y_t | a_1..a_T, y_1..y_{t-1})` read off the
/// joint law and `s_t(y_t) p_t(y_t | a_1..a_t, y_1..y_{t-1})`.
pub fn bayes_residual(dgp: &FiniteDgp, target: &[usize]) -> Result<f64, OracleError> {
    check_target(dgp, target)?;
    let paths = enumerate_paths(dgp)?;
    let mut prefix_mass: HashMap<Vec<usize>, f64> = HashMap::new();
    for path in paths.iter().filter(|p| p.treatments == target) {
        for len in 0..=path.outcomes.len() {
            *prefix_mass
                .entry(path.outcomes[..len].to_vec())
                .or_default() += path.probability;
        }
    }
    if prefix_mass.get(&Vec::new()).copied().unwrap_or(0.0) == 0.0 {
        return Err(OracleError::UndefinedConditional(format!(
            "target path {target:?}"
        )));
    }
    let mut worst = 0.0f64;
    for t in 1..dgp.horizon() {
        let (treatments, future) = target.split_at(t);
        for previous in odometer(&vec![dgp.outcome_levels(); t - 1]) {
            let Some(&base) = prefix_mass.get(&previous) else {
                continue;
            };
            let denominator = lag1_raw(dgp, treatments, &previous, future);
            if denominator == 0.0 {
                return Err(OracleError::UndefinedRatio { t });
            }
            let mut outcomes = previous.clone();
            for y in 0..dgp.outcome_levels() {
                outcomes.push(y);
                let joint = prefix_mass.get(&outcomes).copied().unwrap_or(0.0) / base;
                let p = dgp.outcome_prob(treatments, &previous, y);
                let s = lag0_raw(dgp, treatments, &outcomes, future) / denominator;
                outcomes.pop();
                worst = worst.max((joint - s * p).abs());
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub zero_mean: f64,
    pub decomposition: f64,
    pub bayes: f64,
    /// Targets with positive probability, each checked.
    pub targets_checked: usize,
}

impl IdentityReport {
    pub fn worst(&self) -> f64 {
        self.zero_mean.max(self.decomposition).max(self.bayes)
    }
}

/// All three residuals, over every target the rule can realize.
pub fn identity_report(dgp: &FiniteDgp) -> Result<IdentityReport, OracleError> {
    let mut report = IdentityReport {
        zero_mean: max_zero_mean_residual(dgp),
        decomposition: 0.0,
        bayes: 0.0,
        targets_checked: 0,
    };
    for target in odometer(&vec![dgp.treatment_levels(); dgp.horizon()]) {
        if target_probability(dgp, &target)? == 0.0 {
            continue;
        }
        report.decomposition = report
            .decomposition
            .max(decomposition_residual(dgp, &target)?);
        report.bayes = report.bayes.max(bayes_residual(dgp, &target)?);
        report.targets_checked += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::coin_epidemic;

    #[test]
    fn coin_epidemic_identities() {
        let dgp = coin_epidemic();
        assert!(zero_mean_residual(&dgp, &[0], &[], &[0]).unwrap().abs() < 1e-15);
        assert!((decomposition_value(&dgp, &[0, 0]).unwrap() - 0.6).abs() < 1e-12);
        assert!(bayes_residual(&dgp, &[0, 0]).unwrap() < 1e-12);
        let report = identity_report(&dgp).unwrap();
        assert_eq!(report.targets_checked, 2);
        assert!(report.worst() < 1e-12);
    }

    #[test]
    fn zero_lag1_is_reported() {
        let dgp = coin_epidemic();
        // a rule that never treats makes the future (1) impossible
        let never = dgp.with_rule(|_, _, _| vec![1.0, 0.0]).unwrap();
        assert_eq!(
            zero_mean_residual(&never, &[0], &[], &[1]),
            Err(OracleError::UndefinedRatio { t: 1 })
        );
    }
}
