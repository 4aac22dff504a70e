use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance has {size} candidate paths, above the cap of {cap}")]
    InstanceTooLarge { size: u128, cap: u128 },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(
        "invalid {kind} kernel row at t={t} (treatments {treatments:?}, outcomes {outcomes:?}): {reason}"
    )]
    InvalidKernel {
        kind: KernelKind,
        t: usize,
        treatments: Vec<usize>,
        outcomes: Vec<usize>,
        reason: String,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("conditional is undefined: {0} has probability zero")]
    UndefinedConditional(String),
    #[error("adaptive ratio is undefined at t={t}: lag-1 propensity is zero")]
    UndefinedRatio { t: usize },
    #[error("cannot parse instance: {0}")]
    Parse(String),
    #[error("unknown built-in instance `{0}`")]
    UnknownBuiltin(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Outcome,
    Rule,
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Outcome => "outcome",
            Self::Rule => "rule",
        })
    }
}
