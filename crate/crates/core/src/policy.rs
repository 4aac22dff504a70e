//! Intervention-assignment rules.
//!
//! A rule decides `a_{t+1}` from the observed history `(a_1..a_t, y_1..y_t)`
//! and, for random rules, a caller-owned random stream. Rules never see the
//! future or any potential outcome, so sequential ignorability holds by
//! construction.

use rand::Rng;
use thiserror::Error;

use crate::epidemic::Treatment;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("malformed history at t={time}: {reason}")]
    MalformedHistory { time: usize, reason: String },
    #[error("forced sequence has no treatment for day {day} (horizon {horizon})")]
    PastHorizon { day: usize, horizon: usize },
    #[error("threshold must lie strictly inside (0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
}

/// What a rule may look at when choosing the next treatment.
///
/// At time `t`, `treatments` holds `a_1..a_t` and `outcomes` holds
/// `y_1..y_t`; `initial_outcome` is `y_0`.
#[derive(Debug, Clone, Copy)]
pub struct ObservedHistory<'a> {
    pub treatments: &'a [Treatment],
    pub outcomes: &'a [f64],
    pub initial_outcome: f64,
}

impl<'a> ObservedHistory<'a> {
    pub fn new(treatments: &'a [Treatment], outcomes: &'a [f64], initial_outcome: f64) -> Self {
        Self {
            treatments,
            outcomes,
            initial_outcome,
        }
    }

    pub fn current_time(&self) -> usize {
        self.treatments.len()
    }

    /// `y_t`, or `y_0` before the first step.
    pub fn latest_outcome(&self) -> Result<f64, PolicyError> {
        let t = self.current_time();
        if self.outcomes.len() != t {
            return Err(PolicyError::MalformedHistory {
                time: t,
                reason: format!(
                    "{} treatments but {} outcomes observed",
                    t,
                    self.outcomes.len()
                ),
            });
        }
        Ok(self
            .outcomes
            .last()
            .copied()
            .unwrap_or(self.initial_outcome))
    }

    pub fn intervention_started(&self) -> bool {
        self.treatments.iter().any(|&a| a != 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRuleParams {
    /// Cumulative outcome level that triggers the first intervention.
    pub threshold: f64,
    /// Once started, the intervention stays on.
    pub persistent: bool,
}

impl ThresholdRuleParams {
    pub fn new(threshold: f64, persistent: bool) -> Result<Self, PolicyError> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(PolicyError::InvalidThreshold(threshold));
        }
        Ok(Self {
            threshold,
            persistent,
        })
    }
}

/// Starts the intervention the first time `y_t > threshold` (strictly).
pub fn decide_threshold(
    history: &ObservedHistory<'_>,
    params: &ThresholdRuleParams,
) -> Result<Treatment, PolicyError> {
    let latest = history.latest_outcome()?;
    if history.intervention_started() {
        return Ok(Treatment::from(params.persistent));
    }
    Ok(Treatment::from(latest > params.threshold))
}

/// Replays a static sequence, ignoring outcomes.
pub fn decide_forced(
    history: &ObservedHistory<'_>,
    sequence: &[Treatment],
) -> Result<Treatment, PolicyError> {
    let day = history.current_time() + 1;
    sequence
        .get(day - 1)
        .copied()
        .ok_or(PolicyError::PastHorizon {
            day,
            horizon: sequence.len(),
        })
}

/// Treats with probability `p`, independently of the history.
///
/// Consumes one uniform per call.
pub fn decide_exogenous<R: Rng + ?Sized>(
    _history: &ObservedHistory<'_>,
    p: f64,
    rng: &mut R,
) -> Treatment {
    let u: f64 = rng.random();
    Treatment::from(u < p)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyRule {
    Threshold(ThresholdRuleParams),
    Forced(Vec<Treatment>),
    Exogenous { probability: f64 },
}

impl PolicyRule {
    pub fn threshold(threshold: f64) -> Result<Self, PolicyError> {
        ThresholdRuleParams::new(threshold, true).map(Self::Threshold)
    }

    pub fn forced(sequence: Vec<Treatment>) -> Self {
        Self::Forced(sequence)
    }

    pub fn exogenous(probability: f64) -> Result<Self, PolicyError> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(PolicyError::InvalidProbability(probability));
        }
        Ok(Self::Exogenous { probability })
    }

    pub fn name(&self) -> String {
        match self {
            Self::Threshold(p) if p.persistent => format!("threshold({})", p.threshold),
            Self::Threshold(p) => format!("threshold({}, non-persistent)", p.threshold),
            Self::Forced(seq) => {
                let ones = seq.iter().filter(|&&a| a != 0).count();
                format!("forced(len={}, treated={})", seq.len(), ones)
            }
            Self::Exogenous { probability } => format!("exogenous({probability})"),
        }
    }

    pub fn decide<R: Rng + ?Sized>(
        &self,
        history: &ObservedHistory<'_>,
        rng: &mut R,
    ) -> Result<Treatment, PolicyError> {
        match self {
            Self::Threshold(params) => decide_threshold(history, params),
            Self::Forced(sequence) => decide_forced(history, sequence),
            Self::Exogenous { probability } => Ok(decide_exogenous(history, *probability, rng)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::derive_replicate_stream;
    use proptest::prelude::*;

    fn rule(threshold: f64) -> ThresholdRuleParams {
        ThresholdRuleParams::new(threshold, true).unwrap()
    }

    #[test]
    fn threshold_triggers_above() {
        let h = ObservedHistory::new(&[0, 0], &[0.01, 0.06], 0.0);
        assert_eq!(decide_threshold(&h, &rule(0.05)).unwrap(), 1);
    }

    #[test]
    fn threshold_tie_does_not_trigger() {
        let h = ObservedHistory::new(&[0, 0], &[0.01, 0.05], 0.0);
        assert_eq!(decide_threshold(&h, &rule(0.05)).unwrap(), 0);
    }

    #[test]
    fn persistent_rule_stays_on() {
        let h = ObservedHistory::new(&[0, 1, 1], &[0.06, 0.02, 0.01], 0.0);
        assert_eq!(decide_threshold(&h, &rule(0.05)).unwrap(), 1);
        let off = ThresholdRuleParams::new(0.05, false).unwrap();
        assert_eq!(decide_threshold(&h, &off).unwrap(), 0);
    }

    #[test]
    fn first_decision_uses_initial_outcome() {
        let h = ObservedHistory::new(&[], &[], 0.0002);
        assert_eq!(decide_threshold(&h, &rule(0.05)).unwrap(), 0);
        let h = ObservedHistory::new(&[], &[], 0.2);
        assert_eq!(decide_threshold(&h, &rule(0.05)).unwrap(), 1);
    }

    #[test]
    fn missing_outcome_is_malformed() {
        let h = ObservedHistory::new(&[0, 0], &[0.01], 0.0);
        assert!(matches!(
            decide_threshold(&h, &rule(0.05)),
            Err(PolicyError::MalformedHistory { time: 2, .. })
        ));
        let h = ObservedHistory::new(&[0], &[], 0.0);
        assert!(decide_threshold(&h, &rule(0.05)).is_err());
    }

    #[test]
    fn threshold_bounds_are_validated() {
        assert!(ThresholdRuleParams::new(0.0, true).is_err());
        assert!(ThresholdRuleParams::new(1.0, true).is_err());
        assert!(PolicyRule::exogenous(1.5).is_err());
    }

    #[test]
    fn forced_lookup() {
        let zeros = vec![0; 10];
        let outcomes = vec![0.5; 7];
        let treatments = vec![1; 7];
        let h = ObservedHistory::new(&treatments, &outcomes, 0.0);
        assert_eq!(decide_forced(&h, &zeros).unwrap(), 0);

        let seq = [0, 0, 1, 1, 1];
        let h = ObservedHistory::new(&[0, 0], &[0.1, 0.2], 0.0);
        assert_eq!(decide_forced(&h, &seq).unwrap(), 1);
    }

    #[test]
    fn forced_past_horizon() {
        let h = ObservedHistory::new(&[0, 0], &[0.1, 0.2], 0.0);
        assert_eq!(
            decide_forced(&h, &[0, 0]),
            Err(PolicyError::PastHorizon { day: 3, horizon: 2 })
        );
    }

    #[test]
    fn exogenous_extremes() {
        let mut rng = derive_replicate_stream(5, 0);
        let h = ObservedHistory::new(&[], &[], 0.0);
        for _ in 0..1000 {
            assert_eq!(decide_exogenous(&h, 0.0, &mut rng), 0);
            assert_eq!(decide_exogenous(&h, 1.0, &mut rng), 1);
        }
    }

    proptest! {
        #[test]
        fn threshold_first_trigger_is_first_exceedance(
            steps in proptest::collection::vec(0.0f64..0.05, 1..40),
            threshold in 0.05f64..0.95,
        ) {
            // cumulative outcomes from non-negative increments
            let mut ys = Vec::new();
            let mut acc = 0.0;
            for s in &steps {
                acc += s;
                ys.push(acc.min(1.0));
            }
            let params = rule(threshold);
            let mut treatments: Vec<Treatment> = Vec::new();
            for t in 0..ys.len() {
                let h = ObservedHistory::new(&treatments, &ys[..t], 0.0);
                let a = decide_threshold(&h, &params).unwrap();
                treatments.push(a);
            }
            // a_{t+1} = 1 first at the smallest t with y_t > threshold
            let first_exceed = ys.iter().position(|&y| y > threshold).map(|i| i + 1);
            let first_treat = treatments.iter().position(|&a| a == 1);
            match first_exceed {
                Some(t) if t < ys.len() => prop_assert_eq!(first_treat, Some(t)),
                _ => prop_assert_eq!(first_treat, None),
            }
        }

        #[test]
        fn forced_rule_replays_sequence(seq in proptest::collection::vec(0u8..2, 1..50)) {
            let rule = PolicyRule::forced(seq.clone());
            let mut rng = derive_replicate_stream(0, 0);
            let mut treatments = Vec::new();
            let mut outcomes = Vec::new();
            for t in 0..seq.len() {
                let h = ObservedHistory::new(&treatments, &outcomes, 0.0);
                treatments.push(rule.decide(&h, &mut rng).unwrap());
                outcomes.push(t as f64 * 0.01);
            }
            prop_assert_eq!(treatments, seq);
        }
    }
}
