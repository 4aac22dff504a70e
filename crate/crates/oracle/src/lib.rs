//! Exact computation on small tabular outcome/treatment processes.
//!
//! Everything here is computed by exhaustive summation over the finite
//! alphabets, so results are exact up to floating-point rounding. The crate
//! covers the causal estimand (g-formula), the associational quantity,
//! prospective propensity scores and their adaptive ratio, the adaptation
//! sets, moving marginal expectations, and the conditions under which
//! conditioning on a static treatment path biases the final outcome
//! downwards.

pub mod builtin;
pub mod dgp;
pub mod error;
pub mod exact;
pub mod format;
pub mod identities;
pub mod propensity;
pub mod random;
pub mod theorem;

pub use builtin::{builtin, coin_epidemic, exogenous_null, reversed_coin, Instance, BUILTIN_NAMES};
pub use dgp::{odometer, FiniteDgp, ROW_SUM_TOLERANCE};
pub use error::{KernelKind, OracleError};
pub use exact::{
    associational_exact, bias_exact, enumerate_paths, enumerate_paths_with_cap, g_formula_exact,
    target_probability, PathProbability, DEFAULT_PATH_CAP,
};
pub use format::{load_instance, parse_instance, write_instance, InstanceFile, LoadError, RowSpec};
pub use identities::{
    bayes_residual, decomposition_residual, decomposition_value, identity_report,
    max_zero_mean_residual, zero_mean_residual, IdentityReport,
};
pub use propensity::{
    adaptive_ratio, classify_adaptations, history_probability, moving_marginal_expectation,
    prospective_propensity, AdaptationPartition, Lag, NEUTRAL_TOLERANCE,
};
pub use random::{
    random_dgp, random_instance, random_opportunistic_instance, sample_target, CumulativeProcess,
    RandomDgpConfig,
};
pub use theorem::{
    check_monotone_process, check_opportunistic, verify_theorem1, HistoryVerdict,
    OpportunismReport, TheoremCheck, TimeReport, MARGIN_TOLERANCE, SEPARATION_TOLERANCE,
};
