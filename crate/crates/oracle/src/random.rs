//! Random instance generators for property testing.

use rand::Rng;

use crate::dgp::FiniteDgp;
use crate::exact::enumerate_paths;
use crate::theorem::check_opportunistic;

/// Shape of unstructured random instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomDgpConfig {
    pub horizon: usize,
    pub outcome_levels: usize,
    pub treatment_levels: usize,
    /// Chance that a kernel entry is forced to zero.
    pub zero_probability: f64,
}

impl Default for RandomDgpConfig {
    fn default() -> Self {
        Self {
            horizon: 3,
            outcome_levels: 3,
            treatment_levels: 2,
            zero_probability: 0.2,
        }
    }
}

/// A random probability vector of length `n` with some entries zeroed.
pub fn random_row<R: Rng + ?Sized>(rng: &mut R, n: usize, zero_probability: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < zero_probability {
                0.0
            } else {
                rng.random::<f64>() + 1e-3
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        let i = rng.random_range(0..n);
        w[i] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Sorted random outcome values.
fn random_values<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    let mut v = 0.0;
    (0..m)
        .map(|_| {
            let current = v;
            v += rng.random_range(0.25..2.0);
            current
        })
        .collect()
}

/// Independent random kernel rows everywhere.
pub fn random_dgp<R: Rng + ?Sized>(rng: &mut R, config: &RandomDgpConfig) -> FiniteDgp {
    let values = random_values(rng, config.outcome_levels);
    let (m, k, z) = (
        config.outcome_levels,
        config.treatment_levels,
        config.zero_probability,
    );
    let outcome_rows: Vec<Vec<f64>> = (1..=config.horizon)
        .flat_map(|t| {
            let rows = crate::dgp::row_count(k, m, t, t - 1) as usize;
            (0..rows).map(|_| random_row(rng, m, z)).collect::<Vec<_>>()
        })
        .collect();
    let rule_rows: Vec<Vec<f64>> = (0..config.horizon)
        .flat_map(|t| {
            let rows = crate::dgp::row_count(k, m, t, t) as usize;
            (0..rows).map(|_| random_row(rng, k, z)).collect::<Vec<_>>()
        })
        .collect();
    let mut outcome_iter = outcome_rows.into_iter();
    let mut rule_iter = rule_rows.into_iter();
    FiniteDgp::from_fns(
        config.horizon,
        values,
        k,
        0.0,
        |_, _, _| outcome_iter.next().expect("one row per table row"),
        |_, _, _| rule_iter.next().expect("one row per table row"),
    )
    .expect("random rows are valid distributions")
}

/// Parameters of the cumulative-count family: `Y_t = Y_{t-1} + B_1 + B_2`
/// with `B_i ~ Bernoulli(min(1, base[a_t] + slope * Y_{t-1}))`, capped at
/// `2T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulativeProcess {
    pub horizon: usize,
    /// Per-step event probability without (index 0) and with (index 1)
    /// treatment.
    pub base: [f64; 2],
    pub slope: f64,
}

impl CumulativeProcess {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, horizon: usize) -> Self {
        let untreated = rng.random_range(0.1..0.8);
        let treated = untreated * rng.random_range(0.2..1.0);
        Self {
            horizon,
            base: [untreated, treated],
            slope: rng.random_range(0.0..0.15),
        }
    }

    pub fn max_outcome(&self) -> usize {
        2 * self.horizon
    }

    /// Distribution of `y_t` given the treatments and earlier outcomes.
    pub fn outcome_row(&self, treatments: &[usize], outcomes: &[usize]) -> Vec<f64> {
        let cap = self.max_outcome();
        let prev = outcomes.last().copied().unwrap_or(0);
        let a = *treatments.last().expect("t >= 1");
        let q = (self.base[a.min(1)] + self.slope * prev as f64).min(1.0);
        let mut row = vec![0.0; cap + 1];
        for (inc, p) in [
            (0, (1.0 - q) * (1.0 - q)),
            (1, 2.0 * q * (1.0 - q)),
            (2, q * q),
        ] {
            row[(prev + inc).min(cap)] += p;
        }
        row
    }

    /// Builds the instance with the given rule.
    pub fn with_rule(&self, rule: impl FnMut(usize, &[usize], &[usize]) -> Vec<f64>) -> FiniteDgp {
        let values = (0..=self.max_outcome()).map(|v| v as f64).collect();
        FiniteDgp::from_fns(
            self.horizon,
            values,
            2,
            0.0,
            |_, a, y| self.outcome_row(a, y),
            rule,
        )
        .expect("cumulative family rows are valid")
    }

    /// Starts treating once `y_t > threshold` and keeps treating.
    pub fn with_threshold_rule(&self, threshold: usize) -> FiniteDgp {
        self.with_rule(move |_, a, y| {
            let started = a.contains(&1);
            let over = y.last().is_some_and(|&v| v > threshold);
            if started || over {
                vec![0.0, 1.0]
            } else {
                vec![1.0, 0.0]
            }
        })
    }

    /// Treats with a probability that is nondecreasing in `y_t`, and stays
    /// on with probability `persistence` once started.
    pub fn with_soft_rule<R: Rng + ?Sized>(&self, rng: &mut R) -> FiniteDgp {
        let mut levels: Vec<f64> = (0..=self.max_outcome())
            .map(|_| rng.random::<f64>())
            .collect();
        levels.sort_by(f64::total_cmp);
        let persistence = rng.random_range(0.5..=1.0);
        self.with_rule(move |_, a, y| {
            let p = if a.contains(&1) {
                persistence
            } else {
                levels[y.last().copied().unwrap_or(0)]
            };
            vec![1.0 - p, p]
        })
    }
}

/// Draws a target path from the joint law of `dgp`.
pub fn sample_target<R: Rng + ?Sized>(rng: &mut R, dgp: &FiniteDgp) -> Vec<usize> {
    let paths = enumerate_paths(dgp).expect("generated instances are small");
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for p in &paths {
        acc += p.probability;
        if u < acc {
            return p.treatments.clone();
        }
    }
    paths.last().expect("at least one path").treatments.clone()
}

/// A random instance from a mixture of unstructured and cumulative-family
/// processes, plus either the all-zero target or one drawn from the joint
/// law.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R) -> (FiniteDgp, Vec<usize>) {
    let horizon = rng.random_range(2..=3);
    let dgp = match rng.random_range(0..3) {
        0 => {
            let config = RandomDgpConfig {
                horizon,
                outcome_levels: rng.random_range(2..=3),
                treatment_levels: 2,
                zero_probability: rng.random_range(0.0..0.4),
            };
            random_dgp(rng, &config)
        }
        1 => CumulativeProcess::random(rng, horizon).with_soft_rule(rng),
        _ => {
            let process = CumulativeProcess::random(rng, horizon);
            let threshold = rng.random_range(0..process.max_outcome());
            process.with_threshold_rule(threshold)
        }
    };
    let target = if rng.random::<f64>() < 0.5 {
        vec![0; horizon]
    } else {
        sample_target(rng, &dgp)
    };
    (dgp, target)
}

/// Rejection-samples [`random_instance`] until the target is realizable and
/// opportunistic at every `t` with a nonconstant ratio.
pub fn random_opportunistic_instance<R: Rng + ?Sized>(
    rng: &mut R,
    max_attempts: usize,
) -> Option<(FiniteDgp, Vec<usize>)> {
    for _ in 0..max_attempts {
        let (dgp, target) = random_instance(rng);
        if crate::exact::target_probability(&dgp, &target).ok()? == 0.0 {
            continue;
        }
        let report = check_opportunistic(&dgp, &target).ok()?;
        if report.opportunistic_everywhere() {
            return Some((dgp, target));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rows_are_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..6 {
            for _ in 0..100 {
                let r = random_row(&mut rng, n, 0.5);
                assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(r.iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn generated_instances_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let (dgp, target) = random_instance(&mut rng);
            assert!(dgp.validate().is_ok());
            assert_eq!(target.len(), dgp.horizon());
        }
    }

    #[test]
    fn cumulative_rows_sum_to_one() {
        let p = CumulativeProcess {
            horizon: 3,
            base: [0.9, 0.3],
            slope: 0.2,
        };
        for prev in 0..=6 {
            for a in 0..2 {
                let row = p.outcome_row(&[a], &[prev]);
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejection_finds_opportunistic_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let found = random_opportunistic_instance(&mut rng, 500);
        assert!(found.is_some());
    }
}
