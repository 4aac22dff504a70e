//! Monte Carlo estimators for the causal estimand and its associational
//! approximation.
//!
//! * The causal estimand `E[Y_t^a]` is estimated by forward simulation with
//!   the treatments forced to the static sequence `a`.
//! * The associational quantity `E[Y_t | A = a]` is estimated by simulating
//!   under an endogenous rule and keeping only the trajectories whose
//!   realized treatments match `a` (rejection conditioning).
//!
//! Replicate `i` draws its outcome noise from
//! `derive_replicate_stream(seed, i)` and any rule randomness from a second
//! stream keyed by [`POLICY_STREAM`]. Replicates are grouped into fixed-size
//! chunks, chunks run in parallel, and every sum is a pairwise sum in
//! replicate order, so the results are bit-identical for any thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epidemic::{sir_step, CompartmentState, ModelError, SirParams, Trajectory, Treatment};
use crate::policy::{ObservedHistory, PolicyError, PolicyRule};
use crate::stream::{derive_replicate_stream, sub_seed};

/// Seed tag of the causal estimator inside a bias report.
pub const CAUSAL_STREAM: u64 = 1;
/// Seed tag of the associational estimator inside a bias report.
pub const ASSOCIATIONAL_STREAM: u64 = 2;
/// Seed tag of rule randomness, relative to an estimator's seed.
pub const POLICY_STREAM: u64 = 3;

const CHUNK_SIZE: usize = 1024;

/// Which treatments a trajectory must match to count towards `E[Y_t | .]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditioningMode {
    /// The whole target path `a_1..a_T`, at every `t`.
    #[default]
    FullPath,
    /// Only the prefix `a_1..a_t` when averaging `Y_t`.
    PerTime,
}

impl std::str::FromStr for ConditioningMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full-path" => Ok(Self::FullPath),
            "per-time" => Ok(Self::PerTime),
            other => Err(format!(
                "unknown conditioning mode `{other}` (expected full-path or per-time)"
            )),
        }
    }
}

impl std::fmt::Display for ConditioningMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::FullPath => "full-path",
            Self::PerTime => "per-time",
        })
    }
}

/// Why conditioning kept nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct RetentionDiagnostics {
    pub total: usize,
    /// `first_divergence[t - 1]` counts replicates whose first treatment
    /// differing from the target was on day `t`.
    pub first_divergence: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("at least one replicate is required")]
    NoReplicates,
    #[error("target sequence has {got} treatments but the horizon is {expected}")]
    TargetLength { expected: usize, got: usize },
    #[error(
        "no trajectory matched the target path ({} replicates, first divergence by day: {:?})",
        .0.total,
        .0.first_divergence
    )]
    EmptyConditioning(RetentionDiagnostics),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    /// Mean of `Y_T` over retained replicates.
    pub mean: f64,
    /// Sample standard deviation of `Y_T` over `sqrt(replicates_retained)`.
    pub std_error: f64,
    pub replicates_total: usize,
    /// Replicates counted at day `T`.
    pub replicates_retained: usize,
    /// Mean of `Y_t` for `t = 1..=T`.
    pub per_time_means: Vec<f64>,
    /// Replicates counted at each day; constant under full-path conditioning.
    pub per_time_retained: Vec<usize>,
    /// `Y_T` of every retained replicate, in replicate order.
    pub final_outcomes: Vec<f64>,
    pub first_divergence: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub rule: String,
    pub threshold: Option<f64>,
    pub causal: EstimateResult,
    pub associational: EstimateResult,
    /// `associational.mean - causal.mean`.
    pub bias: f64,
    /// Bias at `t = 0..=T`; day 0 is deterministic, so entry 0 is zero.
    pub bias_evolution: Vec<f64>,
}

impl BiasReport {
    pub fn from_estimates(
        rule: &PolicyRule,
        causal: EstimateResult,
        associational: EstimateResult,
    ) -> Self {
        let threshold = match rule {
            PolicyRule::Threshold(p) => Some(p.threshold),
            _ => None,
        };
        let bias = associational.mean - causal.mean;
        let bias_evolution = std::iter::once(0.0)
            .chain(
                associational
                    .per_time_means
                    .iter()
                    .zip(&causal.per_time_means)
                    .map(|(a, c)| a - c),
            )
            .collect();
        Self {
            rule: rule.name(),
            threshold,
            causal,
            associational,
            bias,
            bias_evolution,
        }
    }

    /// `sqrt(se_causal^2 + se_associational^2)`.
    pub fn pooled_std_error(&self) -> f64 {
        self.causal.std_error.hypot(self.associational.std_error)
    }
}

/// Simulates one full trajectory under `rule`.
pub fn simulate_trajectory<R, P>(
    params: &SirParams,
    rule: &PolicyRule,
    outcome_rng: &mut R,
    policy_rng: &mut P,
) -> Result<Trajectory, EstimateError>
where
    R: Rng + ?Sized,
    P: Rng + ?Sized,
{
    params.validate()?;
    let mut states = Vec::with_capacity(params.horizon + 1);
    let path = run_path(params, rule, None, outcome_rng, policy_rng, |s| {
        states.push(*s)
    })?;
    Ok(Trajectory {
        states,
        treatments: path.treatments,
        outcomes: path.outcomes,
    })
}

struct Path {
    treatments: Vec<Treatment>,
    outcomes: Vec<f64>,
    /// Day of the first treatment that disagreed with the target.
    diverged_at: Option<usize>,
}

fn run_path<R, P>(
    params: &SirParams,
    rule: &PolicyRule,
    target: Option<&[Treatment]>,
    outcome_rng: &mut R,
    policy_rng: &mut P,
    mut on_state: impl FnMut(&CompartmentState),
) -> Result<Path, EstimateError>
where
    R: Rng + ?Sized,
    P: Rng + ?Sized,
{
    let horizon = params.horizon;
    let initial_outcome = params.initial_outcome();
    let mut state = CompartmentState::initial(params);
    on_state(&state);
    let mut treatments = Vec::with_capacity(horizon);
    let mut outcomes = Vec::with_capacity(horizon);
    for day in 1..=horizon {
        let history = ObservedHistory::new(&treatments, &outcomes, initial_outcome);
        let a = rule.decide(&history, policy_rng)?;
        if a > 1 {
            return Err(ModelError::InvalidTreatment(a).into());
        }
        if let Some(target) = target {
            if target[day - 1] != a {
                return Ok(Path {
                    treatments,
                    outcomes,
                    diverged_at: Some(day),
                });
            }
        }
        state = sir_step(&state, params, a, outcome_rng);
        on_state(&state);
        treatments.push(a);
        outcomes.push(state.outcome(params.population));
    }
    Ok(Path {
        treatments,
        outcomes,
        diverged_at: None,
    })
}

/// Forward simulation under `do(sequence)`.
pub fn estimate_causal(
    params: &SirParams,
    sequence: &[Treatment],
    replicates: usize,
    master_seed: u64,
) -> Result<EstimateResult, EstimateError> {
    check_target(params, sequence)?;
    let rule = PolicyRule::forced(sequence.to_vec());
    monte_carlo(
        params,
        &rule,
        None,
        replicates,
        master_seed,
        ConditioningMode::FullPath,
    )
}

/// Rejection-conditioned estimate of `E[Y_t | A = target]` under `rule`,
/// conditioning on the full target path.
pub fn estimate_associational(
    params: &SirParams,
    rule: &PolicyRule,
    target: &[Treatment],
    replicates: usize,
    master_seed: u64,
) -> Result<EstimateResult, EstimateError> {
    estimate_associational_with_mode(
        params,
        rule,
        target,
        replicates,
        master_seed,
        ConditioningMode::FullPath,
    )
}

pub fn estimate_associational_with_mode(
    params: &SirParams,
    rule: &PolicyRule,
    target: &[Treatment],
    replicates: usize,
    master_seed: u64,
    mode: ConditioningMode,
) -> Result<EstimateResult, EstimateError> {
    check_target(params, target)?;
    monte_carlo(params, rule, Some(target), replicates, master_seed, mode)
}

/// Runs both estimators on independent sub-streams of `master_seed`.
pub fn compute_bias_report(
    params: &SirParams,
    rule: &PolicyRule,
    target: &[Treatment],
    replicates: usize,
    master_seed: u64,
) -> Result<BiasReport, EstimateError> {
    compute_bias_reports(
        params,
        std::slice::from_ref(rule),
        target,
        replicates,
        master_seed,
        ConditioningMode::FullPath,
    )?
    .pop()
    .expect("one report per rule")
}

/// Bias reports for several rules sharing one causal estimate.
///
/// Every rule's associational estimate uses the same sub-stream, so the
/// reports differ only through the rules. The outer error covers the causal
/// run; each rule's result is reported separately.
pub fn compute_bias_reports(
    params: &SirParams,
    rules: &[PolicyRule],
    target: &[Treatment],
    replicates: usize,
    master_seed: u64,
    mode: ConditioningMode,
) -> Result<Vec<Result<BiasReport, EstimateError>>, EstimateError> {
    let causal = estimate_causal(
        params,
        target,
        replicates,
        sub_seed(master_seed, CAUSAL_STREAM),
    )?;
    let associational_seed = sub_seed(master_seed, ASSOCIATIONAL_STREAM);
    Ok(rules
        .iter()
        .map(|rule| {
            let associational = estimate_associational_with_mode(
                params,
                rule,
                target,
                replicates,
                associational_seed,
                mode,
            )?;
            Ok(BiasReport::from_estimates(
                rule,
                causal.clone(),
                associational,
            ))
        })
        .collect())
}

fn check_target(params: &SirParams, target: &[Treatment]) -> Result<(), EstimateError> {
    params.validate()?;
    if target.len() != params.horizon {
        return Err(EstimateError::TargetLength {
            expected: params.horizon,
            got: target.len(),
        });
    }
    if let Some(&a) = target.iter().find(|&&a| a > 1) {
        return Err(ModelError::InvalidTreatment(a).into());
    }
    Ok(())
}

struct ChunkSummary {
    sums: Vec<f64>,
    counts: Vec<usize>,
    finals: Vec<f64>,
    first_divergence: Vec<usize>,
}

fn monte_carlo(
    params: &SirParams,
    rule: &PolicyRule,
    target: Option<&[Treatment]>,
    replicates: usize,
    seed: u64,
    mode: ConditioningMode,
) -> Result<EstimateResult, EstimateError> {
    if replicates == 0 {
        return Err(EstimateError::NoReplicates);
    }
    let horizon = params.horizon;
    let policy_seed = sub_seed(seed, POLICY_STREAM);
    let n_chunks = replicates.div_ceil(CHUNK_SIZE);

    let chunks = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_SIZE;
            let end = (start + CHUNK_SIZE).min(replicates);
            let mut paths = Vec::with_capacity(end - start);
            for i in start..end {
                let mut outcome_rng = derive_replicate_stream(seed, i as u64);
                let mut policy_rng = derive_replicate_stream(policy_seed, i as u64);
                paths.push(run_path(
                    params,
                    rule,
                    target,
                    &mut outcome_rng,
                    &mut policy_rng,
                    |_| {},
                )?);
            }
            Ok(summarize(&paths, horizon, mode))
        })
        .collect::<Result<Vec<_>, EstimateError>>()?;

    let mut per_time_means = Vec::with_capacity(horizon);
    let mut per_time_retained = Vec::with_capacity(horizon);
    let mut column = Vec::with_capacity(chunks.len());
    for t in 0..horizon {
        column.clear();
        column.extend(chunks.iter().map(|c| c.sums[t]));
        let count: usize = chunks.iter().map(|c| c.counts[t]).sum();
        per_time_retained.push(count);
        per_time_means.push(if count == 0 {
            f64::NAN
        } else {
            pairwise_sum(&column) / count as f64
        });
    }
    let mut first_divergence = vec![0usize; horizon];
    for c in &chunks {
        for (acc, n) in first_divergence.iter_mut().zip(&c.first_divergence) {
            *acc += n;
        }
    }
    let final_outcomes: Vec<f64> = chunks.into_iter().flat_map(|c| c.finals).collect();

    let retained = final_outcomes.len();
    if retained == 0 {
        return Err(EstimateError::EmptyConditioning(RetentionDiagnostics {
            total: replicates,
            first_divergence,
        }));
    }
    let mean = per_time_means[horizon - 1];
    let std_error = if retained > 1 {
        let squares: Vec<f64> = final_outcomes.iter().map(|y| (y - mean).powi(2)).collect();
        (pairwise_sum(&squares) / (retained - 1) as f64).sqrt() / (retained as f64).sqrt()
    } else {
        0.0
    };

    Ok(EstimateResult {
        mean,
        std_error,
        replicates_total: replicates,
        replicates_retained: retained,
        per_time_means,
        per_time_retained,
        final_outcomes,
        first_divergence,
    })
}

fn summarize(paths: &[Path], horizon: usize, mode: ConditioningMode) -> ChunkSummary {
    let mut sums = Vec::with_capacity(horizon);
    let mut counts = Vec::with_capacity(horizon);
    let mut column = Vec::with_capacity(paths.len());
    for t in 1..=horizon {
        column.clear();
        column.extend(paths.iter().filter_map(|p| {
            let counted = match (mode, p.diverged_at) {
                (_, None) => true,
                (ConditioningMode::FullPath, Some(_)) => false,
                (ConditioningMode::PerTime, Some(day)) => t < day,
            };
            counted.then(|| p.outcomes[t - 1])
        }));
        counts.push(column.len());
        sums.push(pairwise_sum(&column));
    }
    let finals = paths
        .iter()
        .filter(|p| p.diverged_at.is_none())
        .map(|p| p.outcomes[horizon - 1])
        .collect();
    let mut first_divergence = vec![0usize; horizon];
    for day in paths.iter().filter_map(|p| p.diverged_at) {
        first_divergence[day - 1] += 1;
    }
    ChunkSummary {
        sums,
        counts,
        finals,
        first_divergence,
    }
}

/// Pairwise (cascade) summation in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BASE: usize = 8;
    if values.len() <= BASE {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
