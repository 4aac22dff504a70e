//! Named reference instances.
//!
//! All three share the coin-epidemic outcome process: `Y_1` is a fair coin
//! whatever `a_1` is, and `Y_2 = Y_1 + Bernoulli(q)` with `q = 0.6` untreated
//! and `q = 0.3` treated. They differ only in the rule for `a_2`.

use crate::dgp::FiniteDgp;
use crate::error::OracleError;

/// A loadable instance: the process plus the targets worth reporting on.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub dgp: FiniteDgp,
    pub targets: Vec<Vec<usize>>,
}

pub const BUILTIN_NAMES: [&str; 3] = ["coin-epidemic", "exogenous-null", "reversed-coin"];

fn coin_outcome(t: usize, treatments: &[usize], outcomes: &[usize]) -> Vec<f64> {
    if t == 1 {
        return vec![0.5, 0.5, 0.0];
    }
    let q = if treatments[1] == 0 { 0.6 } else { 0.3 };
    match outcomes[0] {
        0 => vec![1.0 - q, q, 0.0],
        1 => vec![0.0, 1.0 - q, q],
        _ => vec![0.0, 0.0, 1.0],
    }
}

fn coin_with_rule(rule: impl FnMut(usize, &[usize], &[usize]) -> Vec<f64>) -> FiniteDgp {
    FiniteDgp::from_fns(2, vec![0.0, 1.0, 2.0], 2, 0.0, coin_outcome, rule)
        .expect("built-in instance is valid")
}

/// Never treats on day 1; treats on day 2 with probability 0.2 after
/// `Y_1 = 0` and always after `Y_1 >= 1`.
pub fn coin_epidemic() -> FiniteDgp {
    coin_with_rule(|t, _, y| match (t, y.first()) {
        (0, _) => vec![1.0, 0.0],
        (_, Some(0)) => vec![0.8, 0.2],
        _ => vec![0.0, 1.0],
    })
}

/// Treatments ignore outcomes: `a_1` is a fair coin and `a_2 = 1` with
/// probability 0.3.
pub fn exogenous_null() -> FiniteDgp {
    coin_with_rule(|t, _, _| {
        if t == 0 {
            vec![0.5, 0.5]
        } else {
            vec![0.7, 0.3]
        }
    })
}

/// The coin-epidemic rule with the roles of the day-1 outcomes swapped:
/// always treats after `Y_1 = 0`.
pub fn reversed_coin() -> FiniteDgp {
    coin_with_rule(|t, _, y| match (t, y.first()) {
        (0, _) => vec![1.0, 0.0],
        (_, Some(0)) => vec![0.0, 1.0],
        _ => vec![0.8, 0.2],
    })
}

pub fn builtin(name: &str) -> Result<Instance, OracleError> {
    let dgp = match name {
        "coin-epidemic" => coin_epidemic(),
        "exogenous-null" => exogenous_null(),
        "reversed-coin" => reversed_coin(),
        other => return Err(OracleError::UnknownBuiltin(other.to_string())),
    };
    Ok(Instance {
        name: name.to_string(),
        dgp,
        targets: vec![vec![0, 0]],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_names_resolve() {
        for name in BUILTIN_NAMES {
            let inst = builtin(name).unwrap();
            assert_eq!(inst.name, name);
            assert_eq!(inst.dgp.horizon(), 2);
        }
        assert!(matches!(
            builtin("nope"),
            Err(OracleError::UnknownBuiltin(_))
        ));
    }
}
