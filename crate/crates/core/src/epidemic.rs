//! Stochastic discrete-time SIR model.
//!
//! One step from day `t - 1` to day `t` under treatment `a_t`:
//!
//! ```text
//! new_inf = exp(lambda * a_t) * beta * S * I / N
//! new_rec = gamma * I
//! S' = S - (new_inf + e1)
//! I' = I + (new_inf + e1) - (new_rec + e2)
//! R' = R + (new_rec + e2)
//! ```
//!
//! `e1 ~ N(0, k * new_inf)` truncated so that total infections lie in
//! `[0, S]`, and `e2 ~ N(0, k * new_rec)` truncated so that total recoveries
//! lie in `[0, I]`, where `k` is the overdispersion. Compartments are real
//! valued and are never rounded.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noise::{invert_truncated_normal, NoiseSpec};

/// Treatment value. The SIR kernel accepts 0 (no intervention) or 1.
pub type Treatment = u8;

/// Absolute tolerance for `S + I + R = N`.
pub const CONSERVATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid SIR parameter `{name}` = {value}: {reason}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid compartment state {state:?}: {reason}")]
    InvalidState {
        state: CompartmentState,
        reason: &'static str,
    },
    #[error("treatment {0} is not supported by the SIR kernel (expected 0 or 1)")]
    InvalidTreatment(Treatment),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SirParams {
    /// Closed population size `N`.
    pub population: f64,
    /// Infected count on day 0.
    pub initial_infected: f64,
    /// Contact rate per day.
    pub beta: f64,
    /// Recovery rate per day.
    pub gamma: f64,
    /// Log-scale intervention strength; the contact rate is scaled by
    /// `exp(lambda * a)`.
    pub lambda: f64,
    /// Noise variance multiplier.
    pub overdispersion: f64,
    /// Number of simulated days `T`.
    pub horizon: usize,
}

impl Default for SirParams {
    fn default() -> Self {
        Self {
            population: 1_000_000.0,
            initial_infected: 200.0,
            beta: 2.0 / 7.0,
            gamma: 1.0 / 7.0,
            lambda: -0.2,
            overdispersion: 500.0,
            horizon: 100,
        }
    }
}

impl SirParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        fn bad(name: &'static str, value: f64, reason: &'static str) -> ModelError {
            ModelError::InvalidParam {
                name,
                value,
                reason,
            }
        }
        let n = self.population;
        if !(n.is_finite() && n > 0.0) {
            return Err(bad("population", n, "must be finite and > 0"));
        }
        let i0 = self.initial_infected;
        if !(i0.is_finite() && i0 > 0.0 && i0 < n) {
            return Err(bad("initial_infected", i0, "must lie in (0, population)"));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(bad("beta", self.beta, "must be finite and > 0"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(bad("gamma", self.gamma, "must lie in (0, 1]"));
        }
        if !self.lambda.is_finite() {
            return Err(bad("lambda", self.lambda, "must be finite"));
        }
        if !(self.overdispersion.is_finite() && self.overdispersion >= 0.0) {
            return Err(bad(
                "overdispersion",
                self.overdispersion,
                "must be finite and >= 0",
            ));
        }
        if self.horizon < 1 {
            return Err(bad("horizon", self.horizon as f64, "must be >= 1"));
        }
        Ok(())
    }

    /// Day-0 outcome `I_0 / N`.
    pub fn initial_outcome(&self) -> f64 {
        CompartmentState::initial(self).outcome(self.population)
    }
}

/// S/I/R occupancy of the closed population on one day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompartmentState {
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

impl CompartmentState {
    pub fn initial(params: &SirParams) -> Self {
        Self {
            s: params.population - params.initial_infected,
            i: params.initial_infected,
            r: 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.s + self.i + self.r
    }

    /// Cumulative infected proportion `1 - S / N`.
    pub fn outcome(&self, population: f64) -> f64 {
        1.0 - self.s / population
    }

    pub fn validate(&self, population: f64) -> Result<(), ModelError> {
        if !(self.s >= 0.0 && self.i >= 0.0 && self.r >= 0.0) {
            return Err(ModelError::InvalidState {
                state: *self,
                reason: "compartments must be non-negative",
            });
        }
        if (self.total() - population).abs() > CONSERVATION_TOLERANCE {
            return Err(ModelError::InvalidState {
                state: *self,
                reason: "compartments must sum to the population",
            });
        }
        Ok(())
    }
}

/// Expected transitions of one step before noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    pub new_infections: f64,
    pub new_recoveries: f64,
}

pub fn drift(state: &CompartmentState, params: &SirParams, treatment: Treatment) -> Drift {
    let contact = (params.lambda * f64::from(treatment)).exp() * params.beta;
    Drift {
        new_infections: contact * state.s * state.i / params.population,
        new_recoveries: params.gamma * state.i,
    }
}

/// Advances the epidemic by one day under `treatment`.
///
/// Draws the infection noise and then the recovery noise, one uniform each.
/// A zero drift term has zero noise variance, so an extinct epidemic
/// (`I = 0`) stays put.
pub fn sir_step<R: Rng + ?Sized>(
    state: &CompartmentState,
    params: &SirParams,
    treatment: Treatment,
    rng: &mut R,
) -> CompartmentState {
    let Drift {
        new_infections,
        new_recoveries,
    } = drift(state, params, treatment);
    let k = params.overdispersion;

    let infection_noise = NoiseSpec {
        mean: 0.0,
        variance: k * new_infections,
        lower: -new_infections,
        upper: state.s - new_infections,
    };
    let e1 = invert_truncated_normal(&infection_noise, rng.random());

    let recovery_noise = NoiseSpec {
        mean: 0.0,
        variance: k * new_recoveries,
        lower: -new_recoveries,
        upper: state.i - new_recoveries,
    };
    let e2 = invert_truncated_normal(&recovery_noise, rng.random());

    // clamp absorbs rounding in `drift + noise` at the interval ends
    let infections = (new_infections + e1).clamp(0.0, state.s);
    let recoveries = (new_recoveries + e2).clamp(0.0, state.i);
    CompartmentState {
        s: state.s - infections,
        i: (state.i - recoveries) + infections,
        r: state.r + recoveries,
    }
}

/// One simulated epidemic: `states[t]` for `t = 0..=T`, and `treatments[t-1]`
/// and `outcomes[t-1]` for day `t = 1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<CompartmentState>,
    pub treatments: Vec<Treatment>,
    pub outcomes: Vec<f64>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.treatments.len()
    }

    pub fn final_outcome(&self) -> Option<f64> {
        self.outcomes.last().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::derive_replicate_stream;

    fn noiseless() -> SirParams {
        SirParams {
            overdispersion: 0.0,
            ..SirParams::default()
        }
    }

    #[test]
    fn reference_parameters() {
        let p = SirParams::default();
        assert_eq!(p.population, 1e6);
        assert_eq!(p.initial_infected, 200.0);
        assert_eq!(p.horizon, 100);
        assert!((p.beta / p.gamma - 2.0).abs() < 1e-12);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn noiseless_step_matches_hand_computation() {
        let params = noiseless();
        let state = CompartmentState {
            s: 999_800.0,
            i: 200.0,
            r: 0.0,
        };
        let mut rng = derive_replicate_stream(0, 0);
        let next = sir_step(&state, &params, 0, &mut rng);
        let new_inf = (2.0 / 7.0) * 999_800.0 * 200.0 / 1e6;
        let new_rec = 200.0 / 7.0;
        assert!((next.s - 999_742.868_6).abs() < 1e-3);
        assert!((next.i - 228.5600).abs() < 1e-3);
        assert!((next.r - 28.5714).abs() < 1e-3);
        assert!((next.s - (999_800.0 - new_inf)).abs() < 1e-9);
        assert!((next.r - new_rec).abs() < 1e-12);
    }

    #[test]
    fn extinct_state_is_absorbing() {
        let params = SirParams::default();
        let state = CompartmentState {
            s: 600_000.0,
            i: 0.0,
            r: 400_000.0,
        };
        let mut rng = derive_replicate_stream(3, 0);
        for _ in 0..10 {
            assert_eq!(sir_step(&state, &params, 0, &mut rng), state);
            assert_eq!(sir_step(&state, &params, 1, &mut rng), state);
        }
    }

    #[test]
    fn intervention_scales_new_infections() {
        let params = noiseless();
        let state = CompartmentState::initial(&params);
        let untreated = drift(&state, &params, 0).new_infections;
        let treated = drift(&state, &params, 1).new_infections;
        assert!((treated / untreated - (-0.2f64).exp()).abs() < 1e-12);
        assert!((treated / untreated - 0.8187).abs() < 1e-4);
    }

    #[test]
    fn noiseless_run_reproduces_classical_recursion() {
        let params = noiseless();
        let mut rng = derive_replicate_stream(11, 0);
        let mut state = CompartmentState::initial(&params);
        let (mut s, mut i, mut r) = (params.population - 200.0, 200.0, 0.0);
        for _ in 0..params.horizon {
            state = sir_step(&state, &params, 0, &mut rng);
            let inf = params.beta * s * i / params.population;
            let rec = params.gamma * i;
            s -= inf;
            i = (i - rec) + inf;
            r += rec;
            assert_eq!(state, CompartmentState { s, i, r });
        }
    }

    #[test]
    fn invalid_parameters_are_named() {
        let bad = SirParams {
            initial_infected: 2e6,
            ..SirParams::default()
        };
        let err = bad.validate().unwrap_err();
        assert!(err.to_string().contains("initial_infected"));
        let bad = SirParams {
            gamma: 1.5,
            ..SirParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = SirParams {
            horizon: 0,
            ..SirParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn state_validation() {
        let ok = CompartmentState {
            s: 10.0,
            i: 5.0,
            r: 5.0,
        };
        assert!(ok.validate(20.0).is_ok());
        assert!(ok.validate(21.0).is_err());
        let negative = CompartmentState {
            s: -1.0,
            i: 11.0,
            r: 10.0,
        };
        assert!(negative.validate(20.0).is_err());
    }
}
