//! Stochastic SIR simulation and Monte Carlo estimation of time-varying
//! confounding bias.
//!
//! The crate compares two quantities for a static intervention sequence `a`:
//! the causal estimand `E[Y_T^a]`, obtained by forcing the treatments, and
//! the associational quantity `E[Y_T | A = a]`, obtained by conditioning
//! trajectories generated under an endogenous rule on having followed `a`.
//! Their difference is the time-varying confounding bias.

pub mod epidemic;
pub mod estimate;
pub mod noise;
pub mod normal;
pub mod policy;
pub mod stream;

pub use epidemic::{
    drift, sir_step, CompartmentState, Drift, ModelError, SirParams, Trajectory, Treatment,
    CONSERVATION_TOLERANCE,
};
pub use estimate::{
    compute_bias_report, compute_bias_reports, estimate_associational,
    estimate_associational_with_mode, estimate_causal, simulate_trajectory, BiasReport,
    ConditioningMode, EstimateError, EstimateResult, RetentionDiagnostics,
};
pub use noise::{sample_truncated_normal, NoiseError, NoiseSpec};
pub use policy::{
    decide_exogenous, decide_forced, decide_threshold, ObservedHistory, PolicyError, PolicyRule,
    ThresholdRuleParams,
};
pub use stream::{derive_replicate_stream, sub_seed, ReplicateStream};
