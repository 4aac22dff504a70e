//! The opportunistic-intervention conditions, the monotone-process property
//! and the directional-bias check built on them.
//!
//! A history `(a_1..a_t, y_1..y_{t-1})` is examined when it has positive
//! probability under the joint law and the remaining target treatments have
//! positive lag-1 propensity; other histories are skipped and counted.

use crate::dgp::{odometer, FiniteDgp};
use crate::error::OracleError;
use crate::exact::{associational_exact, check_target, g_formula_exact};
use crate::propensity::{
    classify_adaptations, history_probability, lag1_raw, moving_marginal_expectation,
    AdaptationPartition,
};

/// Slack allowed when comparing moving marginal expectations.
pub const SEPARATION_TOLERANCE: f64 = 1e-12;

/// Condition (ii) needs a margin strictly above this.
pub const MARGIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryVerdict {
    /// `y_1..y_{t-1}`.
    pub previous: Vec<usize>,
    pub partition: AdaptationPartition,
    /// `(y_t, f_{T,t}(y_t))` over the support.
    pub moving_marginal: Vec<(usize, f64)>,
    pub condition_i: bool,
    pub condition_ii: bool,
    /// Largest separation `m` achievable by a set of adaptations.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeReport {
    pub t: usize,
    /// Some examined history has a nonconstant ratio.
    pub nonconstant: bool,
    /// Condition (i) at every history with a nonconstant ratio.
    pub condition_i: bool,
    /// Condition (ii) at every history with a nonconstant ratio, and at
    /// least one such history exists.
    pub condition_ii: bool,
    pub opportunistic: bool,
    /// Margin that works for every history with a nonconstant ratio.
    pub margin: Option<f64>,
    pub histories: Vec<HistoryVerdict>,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpportunismReport {
    pub target: Vec<usize>,
    /// One entry per `t = 1..T-1`.
    pub times: Vec<TimeReport>,
}

impl OpportunismReport {
    pub fn any_nonconstant(&self) -> bool {
        self.times.iter().any(|r| r.nonconstant)
    }

    /// Opportunistic at every `t` with a nonconstant ratio, and at least one
    /// such `t` exists.
    pub fn opportunistic_everywhere(&self) -> bool {
        self.any_nonconstant() && self.times.iter().all(|r| !r.nonconstant || r.opportunistic)
    }
}

fn judge_history(
    dgp: &FiniteDgp,
    treatments: &[usize],
    previous: Vec<usize>,
    future: &[usize],
) -> Result<HistoryVerdict, OracleError> {
    let partition = classify_adaptations(dgp, treatments, &previous, future)?;
    let moving_marginal = partition
        .ratios
        .iter()
        .map(|&(y, _)| {
            moving_marginal_expectation(dgp, treatments, &previous, y, future).map(|f| (y, f))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let f_of = |y: usize| {
        moving_marginal
            .iter()
            .find(|(z, _)| *z == y)
            .map(|(_, f)| *f)
            .expect("f computed on the whole support")
    };
    let inf_down = partition
        .downweighted
        .iter()
        .map(|&y| f_of(y))
        .fold(f64::INFINITY, f64::min);
    let sup_up = partition
        .upweighted
        .iter()
        .map(|&y| f_of(y))
        .fold(f64::NEG_INFINITY, f64::max);
    // empty sides make condition (i) vacuous
    let condition_i = inf_down >= sup_up - SEPARATION_TOLERANCE;
    let margin = (!partition.downweighted.is_empty()).then(|| {
        partition
            .downweighted
            .iter()
            .chain(&partition.upweighted)
            .map(|&y| (f_of(y) - inf_down).abs())
            .fold(0.0, f64::max)
    });
    let condition_ii = margin.is_some_and(|m| m > MARGIN_TOLERANCE);
    Ok(HistoryVerdict {
        previous,
        partition,
        moving_marginal,
        condition_i,
        condition_ii,
        margin,
    })
}

/// Evaluates both opportunistic conditions at every `t = 1..T-1`.
pub fn check_opportunistic(
    dgp: &FiniteDgp,
    target: &[usize],
) -> Result<OpportunismReport, OracleError> {
    check_target(dgp, target)?;
    let horizon = dgp.horizon();
    let m = dgp.outcome_levels();
    let mut times = Vec::new();
    for t in 1..horizon {
        let (treatments, future) = target.split_at(t);
        let mut histories = Vec::new();
        let mut skipped = 0;
        for previous in odometer(&vec![m; t - 1]) {
            if history_probability(dgp, treatments, &previous) == 0.0
                || lag1_raw(dgp, treatments, &previous, future) == 0.0
            {
                skipped += 1;
                continue;
            }
            histories.push(judge_history(dgp, treatments, previous, future)?);
        }
        let active: Vec<&HistoryVerdict> = histories
            .iter()
            .filter(|h| h.partition.is_nonconstant())
            .collect();
        let nonconstant = !active.is_empty();
        let condition_i = active.iter().all(|h| h.condition_i);
        let condition_ii = nonconstant && active.iter().all(|h| h.condition_ii);
        let margin = active
            .iter()
            .map(|h| h.margin.unwrap_or(0.0))
            .reduce(f64::min);
        times.push(TimeReport {
            t,
            nonconstant,
            condition_i,
            condition_ii,
            opportunistic: condition_i && condition_ii,
            margin,
            histories,
            skipped,
        });
    }
    Ok(OpportunismReport {
        target: target.to_vec(),
        times,
    })
}

/// Whether `f_{T,t}` is nondecreasing in `y_t` for every `t = 1..T-1`,
/// treatment history, outcome history of positive probability under those
/// treatments, and future treatment sequence. Only `y_t` in the support of
/// `p_t` are compared. Vacuously true for `T = 1`.
pub fn check_monotone_process(dgp: &FiniteDgp) -> bool {
    let horizon = dgp.horizon();
    let (k, m) = (dgp.treatment_levels(), dgp.outcome_levels());
    for t in 1..horizon {
        for treatments in odometer(&vec![k; t]) {
            for previous in odometer(&vec![m; t - 1]) {
                let reachable = (0..t - 1).all(|s| {
                    dgp.outcome_prob(&treatments[..=s], &previous[..s], previous[s]) > 0.0
                });
                if !reachable {
                    continue;
                }
                let support: Vec<usize> = (0..m)
                    .filter(|&y| dgp.outcome_prob(&treatments, &previous, y) > 0.0)
                    .collect();
                for future in odometer(&vec![k; horizon - t]) {
                    let mut last = f64::NEG_INFINITY;
                    for &y in &support {
                        let f =
                            moving_marginal_expectation(dgp, &treatments, &previous, y, &future)
                                .expect("arguments are well formed");
                        if f < last - SEPARATION_TOLERANCE {
                            return false;
                        }
                        last = last.max(f);
                    }
                }
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremCheck {
    pub g_formula: f64,
    pub associational: f64,
    /// `associational - g_formula`.
    pub bias: f64,
    pub opportunistic_everywhere: bool,
    /// The bias is negative whenever the target is opportunistic at every
    /// `t` with a nonconstant ratio.
    pub theorem_respected: bool,
    pub report: OpportunismReport,
}

/// Computes the bias and checks it against the opportunistic conditions.
pub fn verify_theorem1(dgp: &FiniteDgp, target: &[usize]) -> Result<TheoremCheck, OracleError> {
    let associational = associational_exact(dgp, target)?;
    let g_formula = g_formula_exact(dgp, target)?;
    let bias = associational - g_formula;
    let report = check_opportunistic(dgp, target)?;
    let opportunistic_everywhere = report.opportunistic_everywhere();
    Ok(TheoremCheck {
        g_formula,
        associational,
        bias,
        opportunistic_everywhere,
        theorem_respected: !opportunistic_everywhere || bias < 0.0,
        report,
    })
}
