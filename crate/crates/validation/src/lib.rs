//! End-to-end acceptance criteria for the workspace.
//!
//! Each criterion returns a one-line verdict. The `acceptance` test target
//! runs them all and prints one line per criterion.

use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use epiconfound_core::{
    compute_bias_reports, derive_replicate_stream, simulate_trajectory, BiasReport,
    ConditioningMode, PolicyRule, SirParams, CONSERVATION_TOLERANCE,
};
use epiconfound_oracle::{
    associational_exact, coin_epidemic, g_formula_exact, identity_report, odometer,
    random_instance, random_opportunistic_instance, verify_theorem1, FiniteDgp,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const THRESHOLDS: [f64; 6] = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30];
const REPLICATES: usize = 100_000;
const SEED: u64 = 1;
const FUZZ_SEED: u64 = 0xacce;

/// Detail line on success or failure.
pub type Verdict = Result<String, String>;

pub struct Criterion {
    pub name: &'static str,
    pub check: fn() -> Verdict,
}

/// The full-scale sweep shared by the SIR criteria.
fn sweep() -> &'static Vec<BiasReport> {
    static SWEEP: OnceLock<Vec<BiasReport>> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let params = SirParams::default();
        let rules: Vec<PolicyRule> = THRESHOLDS
            .iter()
            .map(|&t| PolicyRule::threshold(t).unwrap())
            .collect();
        compute_bias_reports(
            &params,
            &rules,
            &vec![0; params.horizon],
            REPLICATES,
            SEED,
            ConditioningMode::FullPath,
        )
        .expect("causal estimate")
        .into_iter()
        .map(|r| r.expect("every threshold retains trajectories"))
        .collect()
    })
}

fn listing(f: impl Fn(&BiasReport) -> f64) -> String {
    sweep()
        .iter()
        .map(|r| format!("{:.4}", f(r)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn causal_estimand() -> Verdict {
    let start = Instant::now();
    let causal = sweep()[0].causal.mean;
    let msg = format!(
        "mean Y_T = {causal:.4} over {REPLICATES} replicates (sweep took {:.1?})",
        start.elapsed()
    );
    if causal >= 0.75 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn associational_quantity() -> Verdict {
    let msg = format!(
        "associational Y_T by threshold: {}",
        listing(|r| r.associational.mean)
    );
    if sweep().iter().all(|r| r.associational.mean <= 0.10) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn bias_band() -> Verdict {
    let msg = format!("bias_T by threshold: {}", listing(|r| r.bias));
    if sweep().iter().all(|r| (-0.75..=-0.55).contains(&r.bias)) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn bias_ordering() -> Verdict {
    let magnitudes: Vec<f64> = sweep().iter().map(|r| r.bias.abs()).collect();
    let msg = format!("|bias_T| by threshold: {}", listing(|r| r.bias.abs()));
    if magnitudes.windows(2).all(|w| w[0] > w[1]) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Independent oracle: joint probability of every point of `A^T x Y^T`.
fn brute_estimands(dgp: &FiniteDgp, target: &[usize]) -> (f64, f64) {
    let t = dgp.horizon();
    let mut radices = vec![dgp.treatment_levels(); t];
    radices.extend(vec![dgp.outcome_levels(); t]);
    let (mut num, mut den, mut g) = (0.0, 0.0, 0.0);
    for point in odometer(&radices) {
        let (a, y) = point.split_at(t);
        let (mut joint, mut forced) = (1.0, 1.0);
        for s in 0..t {
            joint *= dgp.rule_row(&a[..s], &y[..s])[a[s]];
            joint *= dgp.outcome_row(&a[..=s], &y[..s])[y[s]];
            forced *= dgp.outcome_row(&target[..=s], &y[..s])[y[s]];
        }
        let value = dgp.value(y[t - 1]);
        if a == target {
            num += joint * value;
            den += joint;
        }
        // each outcome path appears once per treatment path
        if a.iter().all(|&x| x == 0) {
            g += forced * value;
        }
    }
    (g, num / den)
}

fn oracle_exactness() -> Verdict {
    let dgp = coin_epidemic();
    let target = [0, 0];
    let g = g_formula_exact(&dgp, &target).map_err(|e| e.to_string())?;
    let assoc = associational_exact(&dgp, &target).map_err(|e| e.to_string())?;
    let (g_ref, assoc_ref) = brute_estimands(&dgp, &target);
    let bias = assoc - g;
    let msg = format!("g = {g}, associational = {assoc}, bias = {bias}");
    let ok = (g - 1.1).abs() <= 1e-12
        && (assoc - 0.6).abs() <= 1e-12
        && (bias + 0.5).abs() <= 1e-12
        && (g - g_ref).abs() <= 1e-12
        && (assoc - assoc_ref).abs() <= 1e-12
        && (bias - (assoc_ref - g_ref)).abs() <= 1e-12;
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(FUZZ_SEED);
    let (mut zero_mean, mut decomposition) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let (dgp, _) = random_instance(&mut rng);
        let report = identity_report(&dgp).map_err(|e| e.to_string())?;
        zero_mean = zero_mean.max(report.zero_mean);
        decomposition = decomposition.max(report.decomposition);
    }
    let msg = format!(
        "50 instances, worst zero-mean residual {zero_mean:.2e}, worst decomposition residual {decomposition:.2e}"
    );
    if zero_mean <= 1e-10 && decomposition <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn theorem_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(FUZZ_SEED);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100 {
        let (dgp, target) = random_opportunistic_instance(&mut rng, 10_000)
            .ok_or_else(|| format!("instance {i}: sampler exhausted"))?;
        let check = verify_theorem1(&dgp, &target).map_err(|e| e.to_string())?;
        worst = worst.max(check.bias);
        if !(check.opportunistic_everywhere && check.bias < 0.0) {
            return Err(format!("instance {i}: bias {}", check.bias));
        }
    }
    Ok(format!(
        "100/100 opportunistic instances have negative bias (largest {worst:.3e})"
    ))
}

fn null_endogeneity() -> Verdict {
    // all-zeros under a fair coin has probability 2^-T, so a short horizon
    // is needed for any trajectory to be retained
    let params = SirParams {
        population: 1e4,
        horizon: 8,
        ..SirParams::default()
    };
    let rule = PolicyRule::exogenous(0.5).unwrap();
    let report = compute_bias_reports(
        &params,
        &[rule],
        &[0; 8],
        REPLICATES,
        SEED,
        ConditioningMode::FullPath,
    )
    .map_err(|e| e.to_string())?
    .pop()
    .unwrap()
    .map_err(|e| e.to_string())?;
    let se = report.pooled_std_error();
    let msg = format!(
        "bias = {:.3e}, pooled SE = {se:.3e}, retained {}",
        report.bias, report.associational.replicates_retained
    );
    if report.bias.abs() < 3.0 * se {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn invariants() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(FUZZ_SEED);
    for i in 0..1000u64 {
        let population = 10f64.powf(rng.random_range(3.0..7.0)).round();
        let params = SirParams {
            population,
            initial_infected: (population * rng.random_range(1e-5..0.05)).max(1.0),
            beta: rng.random_range(0.05..1.0),
            gamma: rng.random_range(0.02..=1.0),
            lambda: rng.random_range(-2.0..0.5),
            overdispersion: rng.random_range(0.0..5000.0),
            horizon: rng.random_range(1..=150),
        };
        let rule = match i % 3 {
            0 => PolicyRule::threshold(rng.random_range(0.0..1.0)).unwrap(),
            1 => PolicyRule::exogenous(rng.random_range(0.0..=1.0)).unwrap(),
            _ => PolicyRule::forced(
                (0..params.horizon)
                    .map(|_| rng.random_range(0..2))
                    .collect(),
            ),
        };
        let mut outcome_rng = derive_replicate_stream(FUZZ_SEED, i);
        let mut policy_rng = derive_replicate_stream(FUZZ_SEED + 1, i);
        let traj = simulate_trajectory(&params, &rule, &mut outcome_rng, &mut policy_rng)
            .map_err(|e| format!("trajectory {i}: {e}"))?;
        let mut prev = params.initial_outcome();
        for (t, s) in traj.states.iter().enumerate() {
            if (s.total() - population).abs() > CONSERVATION_TOLERANCE {
                return Err(format!("trajectory {i}, day {t}: S+I+R = {}", s.total()));
            }
            if s.s < 0.0 || s.i < 0.0 || s.r < 0.0 {
                return Err(format!(
                    "trajectory {i}, day {t}: negative compartment {s:?}"
                ));
            }
            let y = s.outcome(population);
            if y < prev {
                return Err(format!(
                    "trajectory {i}, day {t}: Y fell from {prev} to {y}"
                ));
            }
            prev = y;
        }
    }
    Ok(
        "1000 trajectories conserve the population, stay non-negative and have nondecreasing Y"
            .into(),
    )
}

fn run_figures34(out: &Path, threads: usize) -> Result<(), String> {
    use clap::Parser;
    let args = [
        "epiconfound".to_string(),
        "figures34".into(),
        "--seed".into(),
        "7".into(),
        "--threads".into(),
        threads.to_string(),
        "--out".into(),
        out.display().to_string(),
    ];
    let cli = epiconfound::Cli::try_parse_from(args).map_err(|e| e.to_string())?;
    epiconfound::run(&cli, &mut std::io::sink()).map_err(|e| e.to_string())
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let one = dir.path().join("threads1");
    let eight = dir.path().join("threads8");
    run_figures34(&one, 1)?;
    run_figures34(&eight, 8)?;
    for name in [
        epiconfound::figures::EVOLUTION_CSV,
        epiconfound::figures::SUMMARY_CSV,
    ] {
        let a = std::fs::read(one.join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(eight.join(name)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{name} differs between 1 and 8 threads"));
        }
    }
    Ok("default figures34 CSVs are byte-identical at 1 and 8 threads".into())
}

pub fn criteria() -> [Criterion; 10] {
    [
        (
            "causal estimand at full scale",
            causal_estimand as fn() -> Verdict,
        ),
        (
            "associational quantity at most 0.10",
            associational_quantity,
        ),
        ("bias band [-0.75, -0.55]", bias_band),
        ("bias magnitude decreasing in threshold", bias_ordering),
        ("coin-epidemic exactness", oracle_exactness),
        ("zero-mean and decomposition identities", identities),
        ("negative bias on opportunistic instances", theorem_suite),
        ("null-endogeneity control", null_endogeneity),
        ("trajectory invariants", invariants),
        ("thread-count determinism", determinism),
    ]
    .map(|(name, check)| Criterion { name, check })
}

/// Runs every criterion, writing `[PASS]`/`[FAIL]` lines; returns the
/// number of failures.
pub fn run_all(out: &mut dyn Write) -> std::io::Result<usize> {
    let all = criteria();
    let mut failed = 0;
    for (i, c) in all.iter().enumerate() {
        let started = Instant::now();
        let verdict = (c.check)();
        let elapsed = started.elapsed();
        let (tag, detail) = match verdict {
            Ok(detail) => ("PASS", detail),
            Err(detail) => {
                failed += 1;
                ("FAIL", detail)
            }
        };
        writeln!(
            out,
            "[{tag}] AC{:<2} {}: {detail} ({elapsed:.1?})",
            i + 1,
            c.name
        )?;
        out.flush()?;
    }
    writeln!(
        out,
        "acceptance: {} passed, {failed} failed",
        all.len() - failed
    )?;
    Ok(failed)
}
