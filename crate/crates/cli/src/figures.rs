//! The SIR scenarios: a single sample trajectory and the bias sweep over
//! intervention thresholds.

use std::path::{Path, PathBuf};

use epiconfound_core::estimate::{ASSOCIATIONAL_STREAM, CAUSAL_STREAM};
use epiconfound_core::{
    derive_replicate_stream, estimate_associational_with_mode, estimate_causal,
    simulate_trajectory, sub_seed, BiasReport, EstimateError, PolicyRule, Trajectory,
};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::svg::{LineChart, Series};
use crate::table::{opt_sig10, sig10, Table};

pub const TRAJECTORY_HEADER: &str = "t,S,I,R,Y";
pub const EVOLUTION_HEADER: &str = "threshold,t,causal_mean,associational_mean,bias";
pub const SUMMARY_HEADER: &str = "threshold,causal_T,associational_T,bias_T,retained,total";

pub const TRAJECTORY_CSV: &str = "figure2_trajectory.csv";
pub const TRAJECTORY_SVG: &str = "figure2_trajectory.svg";
pub const EVOLUTION_CSV: &str = "figure3_bias_evolution.csv";
pub const EVOLUTION_SVG: &str = "figure3_bias_evolution.svg";
pub const SUMMARY_CSV: &str = "figure4_bias_summary.csv";
pub const SUMMARY_SVG: &str = "figure4_bias_summary.svg";
pub const EFFECTIVE_CONFIG: &str = "config.toml";

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes the effective configuration next to the outputs.
fn write_effective_config(config: &ExperimentConfig) -> Result<(), CliError> {
    let path = config.experiment.out.join(EFFECTIVE_CONFIG);
    write_text(&path, &config.to_toml()?)
}

#[derive(Debug)]
pub struct Figure2Output {
    pub trajectory: Trajectory,
    pub files: Vec<PathBuf>,
}

/// One no-intervention trajectory at the configured seed.
pub fn run_figure2(config: &ExperimentConfig) -> Result<Figure2Output, CliError> {
    config.validate()?;
    let params = &config.model;
    let rule = PolicyRule::forced(vec![0; params.horizon]);
    let mut outcome_rng = derive_replicate_stream(config.experiment.seed, 0);
    let mut policy_rng = derive_replicate_stream(config.experiment.seed, 1);
    let trajectory = simulate_trajectory(params, &rule, &mut outcome_rng, &mut policy_rng)?;

    let n = params.population;
    let mut table = Table::new(TRAJECTORY_HEADER);
    for (t, state) in trajectory.states.iter().enumerate() {
        table.push(&[
            t.to_string(),
            sig10(state.s),
            sig10(state.i),
            sig10(state.r),
            sig10(state.outcome(n)),
        ]);
    }
    let series = |name: &str, f: &dyn Fn(usize) -> f64| Series {
        name: name.to_string(),
        points: (0..trajectory.states.len())
            .map(|t| (t as f64, f(t)))
            .collect(),
    };
    let s = &trajectory.states;
    let chart = LineChart {
        title: "Sample trajectory without intervention".into(),
        x_label: "day".into(),
        y_label: "share of population".into(),
        series: vec![
            series("S", &|t| s[t].s / n),
            series("I", &|t| s[t].i / n),
            series("R", &|t| s[t].r / n),
        ],
    };

    let out = &config.experiment.out;
    prepare_out(out)?;
    let files = vec![out.join(TRAJECTORY_CSV), out.join(TRAJECTORY_SVG)];
    table.write(&files[0])?;
    write_text(&files[1], &chart.render())?;
    write_effective_config(config)?;
    Ok(Figure2Output { trajectory, files })
}

#[derive(Debug)]
pub struct ThresholdOutcome {
    pub threshold: f64,
    pub report: Result<BiasReport, EstimateError>,
}

#[derive(Debug)]
pub struct Figures34Output {
    pub outcomes: Vec<ThresholdOutcome>,
    pub evolution: Table,
    pub summary: Table,
    pub files: Vec<PathBuf>,
}

/// Bias reports for the all-zeros target under every configured threshold.
///
/// A threshold whose conditioning event is never observed becomes a summary
/// row with `retained = 0` and blank associational fields. If that happens
/// for every threshold the files are still written and the run fails with
/// [`CliError::EmptyConditioning`].
pub fn run_figures34(config: &ExperimentConfig) -> Result<Figures34Output, CliError> {
    config.validate()?;
    let params = &config.model;
    let exp = &config.experiment;
    let horizon = params.horizon;
    let rules = exp
        .thresholds
        .iter()
        .map(|&t| PolicyRule::threshold(t).map_err(|e| CliError::Config(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let target = vec![0; horizon];
    // same sub-streams as `compute_bias_reports`, keeping the causal run
    // even when every threshold comes back empty
    let causal = estimate_causal(
        params,
        &target,
        exp.replicates,
        sub_seed(exp.seed, CAUSAL_STREAM),
    )?;
    let associational_seed = sub_seed(exp.seed, ASSOCIATIONAL_STREAM);
    let reports = rules.iter().map(|rule| {
        let assoc = estimate_associational_with_mode(
            params,
            rule,
            &target,
            exp.replicates,
            associational_seed,
            exp.conditioning,
        )?;
        Ok(BiasReport::from_estimates(rule, causal.clone(), assoc))
    });
    let outcomes: Vec<ThresholdOutcome> = exp
        .thresholds
        .iter()
        .zip(reports)
        .map(|(&threshold, report)| ThresholdOutcome { threshold, report })
        .collect();

    let y0 = params.initial_outcome();
    let mut evolution = Table::new(EVOLUTION_HEADER);
    let mut summary = Table::new(SUMMARY_HEADER);
    let mut bias_series = Vec::new();
    for o in &outcomes {
        let th = sig10(o.threshold);
        let report = o.report.as_ref().ok();
        for t in 0..=horizon {
            let causal_mean = if t == 0 {
                y0
            } else {
                causal.per_time_means[t - 1]
            };
            let (assoc, bias) = match report {
                Some(_) if t == 0 => (Some(y0), Some(0.0)),
                Some(r) => (
                    Some(r.associational.per_time_means[t - 1]),
                    Some(r.bias_evolution[t]),
                ),
                None => (None, None),
            };
            evolution.push(&[
                th.clone(),
                t.to_string(),
                sig10(causal_mean),
                opt_sig10(assoc),
                opt_sig10(bias),
            ]);
        }
        summary.push(&[
            th,
            sig10(causal.mean),
            opt_sig10(report.map(|r| r.associational.mean)),
            opt_sig10(report.map(|r| r.bias)),
            report
                .map_or(0, |r| r.associational.replicates_retained)
                .to_string(),
            exp.replicates.to_string(),
        ]);
        if let Some(r) = report {
            bias_series.push(Series {
                name: format!("threshold {}", o.threshold),
                points: r
                    .bias_evolution
                    .iter()
                    .enumerate()
                    .map(|(t, &b)| (t as f64, b))
                    .collect(),
            });
        }
    }

    let evolution_chart = LineChart {
        title: "Bias evolution under no intervention".into(),
        x_label: "day".into(),
        y_label: "associational - causal".into(),
        series: bias_series,
    };
    let at_threshold = |f: &dyn Fn(&BiasReport) -> f64| -> Vec<(f64, f64)> {
        outcomes
            .iter()
            .map(|o| (o.threshold, o.report.as_ref().map_or(f64::NAN, f)))
            .collect()
    };
    let summary_chart = LineChart {
        title: "Final-day estimates by intervention threshold".into(),
        x_label: "threshold".into(),
        y_label: "share of population".into(),
        series: vec![
            Series {
                name: "causal".into(),
                points: exp.thresholds.iter().map(|&t| (t, causal.mean)).collect(),
            },
            Series {
                name: "associational".into(),
                points: at_threshold(&|r| r.associational.mean),
            },
            Series {
                name: "bias".into(),
                points: at_threshold(&|r| r.bias),
            },
        ],
    };

    let out = &exp.out;
    prepare_out(out)?;
    let files: Vec<PathBuf> = [EVOLUTION_CSV, SUMMARY_CSV, EVOLUTION_SVG, SUMMARY_SVG]
        .iter()
        .map(|f| out.join(f))
        .collect();
    evolution.write(&files[0])?;
    summary.write(&files[1])?;
    write_text(&files[2], &evolution_chart.render())?;
    write_text(&files[3], &summary_chart.render())?;
    write_effective_config(config)?;

    if outcomes.iter().all(|o| o.report.is_err()) {
        return Err(CliError::EmptyConditioning {
            thresholds: outcomes.len(),
        });
    }
    Ok(Figures34Output {
        outcomes,
        evolution,
        summary,
        files,
    })
}
