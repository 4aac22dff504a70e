//! Exact path enumeration, the g-formula and the associational quantity.

use crate::dgp::{row_count, FiniteDgp};
use crate::error::OracleError;

/// Default cap on `|Y|^T * |A|^T` for [`enumerate_paths`].
pub const DEFAULT_PATH_CAP: u128 = 10_000_000;

/// One jointly reachable history `(a_1..a_T, y_1..y_T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathProbability {
    pub treatments: Vec<usize>,
    pub outcomes: Vec<usize>,
    pub probability: f64,
}

/// Every positive-probability path of the joint law, in lexicographic order
/// of `(a_1, y_1, a_2, y_2, ...)`.
pub fn enumerate_paths(dgp: &FiniteDgp) -> Result<Vec<PathProbability>, OracleError> {
    enumerate_paths_with_cap(dgp, DEFAULT_PATH_CAP)
}

pub fn enumerate_paths_with_cap(
    dgp: &FiniteDgp,
    cap: u128,
) -> Result<Vec<PathProbability>, OracleError> {
    let t = dgp.horizon();
    let size = row_count(dgp.treatment_levels(), dgp.outcome_levels(), t, t);
    if size > cap {
        return Err(OracleError::InstanceTooLarge { size, cap });
    }
    let mut out = Vec::new();
    let mut a = Vec::with_capacity(t);
    let mut y = Vec::with_capacity(t);
    walk_joint(dgp, &mut a, &mut y, 1.0, &mut out);
    Ok(out)
}

fn walk_joint(
    dgp: &FiniteDgp,
    a: &mut Vec<usize>,
    y: &mut Vec<usize>,
    prob: f64,
    out: &mut Vec<PathProbability>,
) {
    if a.len() == dgp.horizon() {
        out.push(PathProbability {
            treatments: a.clone(),
            outcomes: y.clone(),
            probability: prob,
        });
        return;
    }
    for next_a in 0..dgp.treatment_levels() {
        let pa = dgp.rule_prob(a, y, next_a);
        if pa == 0.0 {
            continue;
        }
        a.push(next_a);
        for next_y in 0..dgp.outcome_levels() {
            let py = dgp.outcome_prob(a, y, next_y);
            if py == 0.0 {
                continue;
            }
            y.push(next_y);
            walk_joint(dgp, a, y, prob * pa * py, out);
            y.pop();
        }
        a.pop();
    }
}

pub(crate) fn check_target(dgp: &FiniteDgp, target: &[usize]) -> Result<(), OracleError> {
    check_treatments(dgp, target)?;
    if target.len() != dgp.horizon() {
        return Err(OracleError::InvalidArgument(format!(
            "target has {} treatments but the horizon is {}",
            target.len(),
            dgp.horizon()
        )));
    }
    Ok(())
}

pub(crate) fn check_treatments(dgp: &FiniteDgp, treatments: &[usize]) -> Result<(), OracleError> {
    if let Some(a) = treatments.iter().find(|&&a| a >= dgp.treatment_levels()) {
        return Err(OracleError::InvalidArgument(format!(
            "treatment {a} is outside 0..{}",
            dgp.treatment_levels()
        )));
    }
    Ok(())
}

/// `E[Y_T]` after the outcome history `outcomes` (length `t`) under
/// treatments `treatments` (length `t`) followed by `future`. Rule kernels
/// are not consulted.
pub(crate) fn expected_final(
    dgp: &FiniteDgp,
    treatments: &mut Vec<usize>,
    outcomes: &mut Vec<usize>,
    future: &[usize],
) -> f64 {
    let Some((&next, rest)) = future.split_first() else {
        return dgp.value(*outcomes.last().expect("t >= 1 at the horizon"));
    };
    treatments.push(next);
    let mut acc = 0.0;
    for y in 0..dgp.outcome_levels() {
        let py = dgp.outcome_prob(treatments, outcomes, y);
        if py == 0.0 {
            continue;
        }
        outcomes.push(y);
        acc += py * expected_final(dgp, treatments, outcomes, rest);
        outcomes.pop();
    }
    treatments.pop();
    acc
}

/// `E[Y_T^a]`: outcomes are drawn from their kernels with the treatments
/// forced to `target`.
pub fn g_formula_exact(dgp: &FiniteDgp, target: &[usize]) -> Result<f64, OracleError> {
    check_target(dgp, target)?;
    Ok(expected_final(
        dgp,
        &mut Vec::new(),
        &mut Vec::new(),
        target,
    ))
}

/// `(P(A = target), E[Y_T 1{A = target}])` under the joint law.
fn conditioned_mass(dgp: &FiniteDgp, target: &[usize]) -> (f64, f64) {
    fn walk(
        dgp: &FiniteDgp,
        a: &mut Vec<usize>,
        y: &mut Vec<usize>,
        target: &[usize],
    ) -> (f64, f64) {
        let t = a.len();
        if t == target.len() {
            return (1.0, dgp.value(*y.last().expect("horizon >= 1")));
        }
        let pa = dgp.rule_prob(a, y, target[t]);
        if pa == 0.0 {
            return (0.0, 0.0);
        }
        a.push(target[t]);
        let (mut mass, mut weighted) = (0.0, 0.0);
        for next in 0..dgp.outcome_levels() {
            let py = dgp.outcome_prob(a, y, next);
            if py == 0.0 {
                continue;
            }
            y.push(next);
            let (m, w) = walk(dgp, a, y, target);
            y.pop();
            mass += py * m;
            weighted += py * w;
        }
        a.pop();
        (pa * mass, pa * weighted)
    }
    walk(dgp, &mut Vec::new(), &mut Vec::new(), target)
}

/// Probability that the rule realizes `target`.
pub fn target_probability(dgp: &FiniteDgp, target: &[usize]) -> Result<f64, OracleError> {
    check_target(dgp, target)?;
    Ok(conditioned_mass(dgp, target).0)
}

/// `E[Y_T | A = target]` by exact conditioning of the joint law.
pub fn associational_exact(dgp: &FiniteDgp, target: &[usize]) -> Result<f64, OracleError> {
    check_target(dgp, target)?;
    let (mass, weighted) = conditioned_mass(dgp, target);
    if mass == 0.0 {
        return Err(OracleError::UndefinedConditional(format!(
            "target path {target:?}"
        )));
    }
    Ok(weighted / mass)
}

/// `associational_exact - g_formula_exact`.
pub fn bias_exact(dgp: &FiniteDgp, target: &[usize]) -> Result<f64, OracleError> {
    Ok(associational_exact(dgp, target)? - g_formula_exact(dgp, target)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::coin_epidemic;

    fn uniform(t: usize) -> FiniteDgp {
        FiniteDgp::from_fns(
            t,
            vec![0.0, 1.0],
            2,
            0.0,
            |_, _, _| vec![0.5, 0.5],
            |_, _, _| vec![0.5, 0.5],
        )
        .unwrap()
    }

    #[test]
    fn uniform_single_step_has_four_quarter_paths() {
        let paths = enumerate_paths(&uniform(1)).unwrap();
        assert_eq!(paths.len(), 4);
        assert!(paths.iter().all(|p| p.probability == 0.25));
    }

    #[test]
    fn coin_epidemic_values() {
        let dgp = coin_epidemic();
        let paths = enumerate_paths(&dgp).unwrap();
        assert_eq!(paths.len(), 6);
        let total: f64 = paths.iter().map(|p| p.probability).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!((g_formula_exact(&dgp, &[0, 0]).unwrap() - 1.1).abs() < 1e-12);
        assert!((associational_exact(&dgp, &[0, 0]).unwrap() - 0.6).abs() < 1e-12);
        assert!((bias_exact(&dgp, &[0, 0]).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_rule_rows_remove_paths() {
        let dgp = coin_epidemic();
        let paths = enumerate_paths(&dgp).unwrap();
        // a_1 = 1 has rule probability zero, and so does a_2 = 0 after y_1 = 1
        assert!(paths.iter().all(|p| p.treatments[0] == 0));
        assert!(!paths
            .iter()
            .any(|p| p.outcomes[0] == 1 && p.treatments[1] == 0));
    }

    #[test]
    fn single_step_g_formula_is_one_expectation() {
        let dgp = FiniteDgp::from_fns(
            1,
            vec![0.0, 2.0, 5.0],
            2,
            0.0,
            |_, a, _| {
                if a[0] == 0 {
                    vec![0.2, 0.3, 0.5]
                } else {
                    vec![0.6, 0.4, 0.0]
                }
            },
            |_, _, _| vec![0.5, 0.5],
        )
        .unwrap();
        assert!((g_formula_exact(&dgp, &[0]).unwrap() - 3.1).abs() < 1e-12);
        assert!((g_formula_exact(&dgp, &[1]).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn treatment_free_kernels_give_equal_g_formula() {
        let dgp = FiniteDgp::from_fns(
            3,
            vec![0.0, 1.0, 3.0],
            2,
            0.0,
            |t, _, y| {
                let last = y.last().copied().unwrap_or(0);
                let w = [0.2 + 0.1 * t as f64, 0.3, 0.5 - 0.1 * t as f64];
                let mut r = w.to_vec();
                r.rotate_right(last);
                r
            },
            |_, _, y| {
                if y.last() == Some(&2) {
                    vec![0.1, 0.9]
                } else {
                    vec![0.7, 0.3]
                }
            },
        )
        .unwrap();
        let base = g_formula_exact(&dgp, &[0, 0, 0]).unwrap();
        for target in crate::dgp::odometer(&[2, 2, 2]) {
            assert!((g_formula_exact(&dgp, &target).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn unreachable_target_is_undefined() {
        let dgp = coin_epidemic();
        assert!(matches!(
            associational_exact(&dgp, &[1, 0]),
            Err(OracleError::UndefinedConditional(_))
        ));
    }

    #[test]
    fn cap_is_enforced() {
        let dgp = uniform(4);
        assert!(matches!(
            enumerate_paths_with_cap(&dgp, 100),
            Err(OracleError::InstanceTooLarge {
                size: 256,
                cap: 100
            })
        ));
        assert_eq!(enumerate_paths_with_cap(&dgp, 256).unwrap().len(), 256);
    }

    #[test]
    fn bad_targets() {
        let dgp = coin_epidemic();
        assert!(g_formula_exact(&dgp, &[0]).is_err());
        assert!(g_formula_exact(&dgp, &[0, 2]).is_err());
    }
}
