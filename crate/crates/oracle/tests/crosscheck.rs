//! Cross-checks against a brute-force oracle that walks the full product
//! space `A^T x Y^T` and derives every quantity from the joint table.

use epiconfound_oracle::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Joint probability of a full `(a, y)` history, from the kernels alone.
fn joint(dgp: &FiniteDgp, a: &[usize], y: &[usize]) -> f64 {
    let mut p = 1.0;
    for t in 0..a.len() {
        p *= dgp.rule_row(&a[..t], &y[..t])[a[t]];
        p *= dgp.outcome_row(&a[..=t], &y[..t])[y[t]];
    }
    p
}

struct Brute {
    table: Vec<(Vec<usize>, Vec<usize>, f64)>,
}

impl Brute {
    fn new(dgp: &FiniteDgp) -> Self {
        let t = dgp.horizon();
        let k = dgp.treatment_levels();
        let m = dgp.outcome_levels();
        let mut radices = vec![k; t];
        radices.extend(vec![m; t]);
        let table = odometer(&radices)
            .map(|d| {
                let (a, y) = d.split_at(t);
                (a.to_vec(), y.to_vec(), joint(dgp, a, y))
            })
            .collect();
        Self { table }
    }

    /// `P(A_1..A_n = a, Y_1..Y_j = y)` for prefixes of any length.
    fn mass(&self, a: &[usize], y: &[usize]) -> f64 {
        self.table
            .iter()
            .filter(|(pa, py, _)| pa.starts_with(a) && py.starts_with(y))
            .map(|(_, _, p)| p)
            .sum()
    }

    fn associational(&self, dgp: &FiniteDgp, target: &[usize]) -> Option<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for (a, y, p) in &self.table {
            if a == target {
                num += p * dgp.value(*y.last().unwrap());
                den += p;
            }
        }
        (den > 0.0).then(|| num / den)
    }
}

/// `E[Y_T^a]` by summing over every outcome path.
fn brute_g_formula(dgp: &FiniteDgp, target: &[usize]) -> f64 {
    let t = dgp.horizon();
    odometer(&vec![dgp.outcome_levels(); t])
        .map(|y| {
            let mut p = 1.0;
            for s in 0..t {
                p *= dgp.outcome_row(&target[..=s], &y[..s])[y[s]];
            }
            p * dgp.value(y[t - 1])
        })
        .sum()
}

/// `f_{T,t}(y_t)` by summing over every continuation.
fn brute_moving_marginal(
    dgp: &FiniteDgp,
    treatments: &[usize],
    outcomes: &[usize],
    future: &[usize],
) -> f64 {
    let full: Vec<usize> = treatments.iter().chain(future).copied().collect();
    let t = outcomes.len();
    odometer(&vec![dgp.outcome_levels(); future.len()])
        .map(|rest| {
            let y: Vec<usize> = outcomes.iter().chain(&rest).copied().collect();
            let mut p = 1.0;
            for s in t..full.len() {
                p *= dgp.outcome_row(&full[..=s], &y[..s])[y[s]];
            }
            p * dgp.value(*y.last().unwrap())
        })
        .sum()
}

fn instance(seed: u64) -> (FiniteDgp, Vec<usize>) {
    random_instance(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn coin_epidemic_matches_brute_force() {
    let dgp = coin_epidemic();
    let brute = Brute::new(&dgp);
    let g = g_formula_exact(&dgp, &[0, 0]).unwrap();
    let assoc = associational_exact(&dgp, &[0, 0]).unwrap();
    assert!((g - 1.1).abs() < 1e-12);
    assert!((assoc - 0.6).abs() < 1e-12);
    assert!((g - brute_g_formula(&dgp, &[0, 0])).abs() < 1e-12);
    assert!((assoc - brute.associational(&dgp, &[0, 0]).unwrap()).abs() < 1e-12);
    assert!(((assoc - g) + 0.5).abs() < 1e-12);
}

#[test]
fn uniform_single_step_enumeration() {
    let dgp = FiniteDgp::from_fns(
        1,
        vec![0.0, 1.0],
        2,
        0.0,
        |_, _, _| vec![0.5, 0.5],
        |_, _, _| vec![0.5, 0.5],
    )
    .unwrap();
    let paths = enumerate_paths(&dgp).unwrap();
    assert_eq!(paths.len(), 4);
    assert!(paths.iter().all(|p| p.probability == 0.25));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_matches_the_product_space(seed in any::<u64>()) {
        let (dgp, _) = instance(seed);
        let brute = Brute::new(&dgp);
        let paths = enumerate_paths(&dgp).unwrap();
        let total: f64 = paths.iter().map(|p| p.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        let positive: Vec<_> = brute.table.iter().filter(|(_, _, p)| *p > 0.0).collect();
        prop_assert_eq!(paths.len(), positive.len());
        for path in &paths {
            let p = joint(&dgp, &path.treatments, &path.outcomes);
            prop_assert!(close(p, path.probability));
        }
    }

    #[test]
    fn estimands_match_brute_force(seed in any::<u64>()) {
        let (dgp, _) = instance(seed);
        let brute = Brute::new(&dgp);
        for target in odometer(&vec![dgp.treatment_levels(); dgp.horizon()]) {
            let g = g_formula_exact(&dgp, &target).unwrap();
            prop_assert!(close(g, brute_g_formula(&dgp, &target)));
            match brute.associational(&dgp, &target) {
                Some(expected) => {
                    let got = associational_exact(&dgp, &target).unwrap();
                    prop_assert!(close(got, expected), "{} vs {}", got, expected);
                }
                None => prop_assert!(associational_exact(&dgp, &target).is_err()),
            }
        }
    }

    #[test]
    fn propensities_and_marginals_match_brute_force(seed in any::<u64>()) {
        let (dgp, _) = instance(seed);
        let brute = Brute::new(&dgp);
        let (k, m, horizon) = (dgp.treatment_levels(), dgp.outcome_levels(), dgp.horizon());
        for t in 1..horizon {
            for a in odometer(&vec![k; t]) {
                for future in odometer(&vec![k; horizon - t]) {
                    let full: Vec<usize> = a.iter().chain(&future).copied().collect();
                    for y in odometer(&vec![m; t]) {
                        let (prev, yt) = (&y[..t - 1], y[t - 1]);
                        // lag-0 and lag-1 as ratios of joint masses
                        let base0 = brute.mass(&a, &y);
                        if base0 > 0.0 {
                            let expected = brute.mass(&full, &y) / base0;
                            let got = prospective_propensity(&dgp, Lag::Zero, &a, &y, &future).unwrap();
                            prop_assert!(close(got, expected));
                        }
                        let base1 = brute.mass(&a, prev);
                        if base1 > 0.0 {
                            let lag1 = brute.mass(&full, prev) / base1;
                            let got = prospective_propensity(&dgp, Lag::One, &a, prev, &future).unwrap();
                            prop_assert!(close(got, lag1));
                            if lag1 > 0.0 && base0 > 0.0 {
                                let s = (brute.mass(&full, &y) / base0) / lag1;
                                let got = adaptive_ratio(&dgp, &a, prev, yt, &future).unwrap();
                                prop_assert!(close(got, s), "s {} vs {}", got, s);
                            }
                        }
                        let f = moving_marginal_expectation(&dgp, &a, prev, yt, &future).unwrap();
                        prop_assert!(close(f, brute_moving_marginal(&dgp, &a, &y, &future)));
                    }
                }
            }
        }
    }

    #[test]
    fn partitions_are_consistent(seed in any::<u64>()) {
        let (dgp, target) = instance(seed);
        let Ok(report) = check_opportunistic(&dgp, &target) else {
            return Ok(());
        };
        for time in &report.times {
            for h in &time.histories {
                let part = &h.partition;
                let n = part.upweighted.len() + part.neutral.len() + part.downweighted.len();
                prop_assert_eq!(n, part.ratios.len());
                for &(y, s) in &part.ratios {
                    let up = part.upweighted.contains(&y);
                    let down = part.downweighted.contains(&y);
                    prop_assert_eq!(up, s > 1.0 + NEUTRAL_TOLERANCE);
                    prop_assert_eq!(down, s < 1.0 - NEUTRAL_TOLERANCE);
                }
                // the ratio has mean one under p_t, so one side cannot be
                // populated without the other
                prop_assert_eq!(part.upweighted.is_empty(), part.downweighted.is_empty());
            }
        }
    }

    #[test]
    fn exogenous_rules_have_no_bias(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (dgp, _) = random_instance(&mut rng);
        let probs: Vec<Vec<f64>> = (0..dgp.horizon())
            .map(|_| epiconfound_oracle::random::random_row(&mut rng, dgp.treatment_levels(), 0.0))
            .collect();
        let exo = dgp.with_rule(|t, _, _| probs[t].clone()).unwrap();
        for target in odometer(&vec![exo.treatment_levels(); exo.horizon()]) {
            let bias = bias_exact(&exo, &target).unwrap();
            prop_assert!(bias.abs() < 1e-12);
            let check = verify_theorem1(&exo, &target).unwrap();
            prop_assert!(!check.report.any_nonconstant());
        }
    }
}

#[test]
fn identities_hold_on_fifty_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1de7);
    for _ in 0..50 {
        let (dgp, _) = random_instance(&mut rng);
        let report = identity_report(&dgp).unwrap();
        assert!(report.targets_checked > 0);
        assert!(report.worst() < 1e-10, "{report:?}");
    }
}

#[test]
fn theorem_holds_on_a_hundred_opportunistic_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e0);
    for i in 0..100 {
        let (dgp, target) = random_opportunistic_instance(&mut rng, 10_000)
            .expect("rejection sampler finds an instance");
        let check = verify_theorem1(&dgp, &target).unwrap();
        assert!(check.opportunistic_everywhere);
        assert!(check.bias < 0.0, "instance {i}: bias {}", check.bias);
        assert!(check.theorem_respected);
    }
}

#[test]
fn monotone_process_with_threshold_rule_is_opportunistic() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x30);
    let mut with_bias = 0;
    for _ in 0..60 {
        let horizon = 2 + (rand::Rng::random_range(&mut rng, 0..3usize));
        let process = CumulativeProcess::random(&mut rng, horizon);
        let threshold = rand::Rng::random_range(&mut rng, 0..process.max_outcome());
        let dgp = process.with_threshold_rule(threshold);
        assert!(check_monotone_process(&dgp));
        let target = vec![0; horizon];
        let check = verify_theorem1(&dgp, &target).unwrap();
        for time in &check.report.times {
            if time.nonconstant {
                assert!(time.opportunistic, "t={} not opportunistic", time.t);
            }
        }
        if check.report.any_nonconstant() {
            assert!(check.bias < 0.0);
            with_bias += 1;
        }
    }
    assert!(with_bias > 20);
}
