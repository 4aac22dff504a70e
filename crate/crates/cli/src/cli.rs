use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use epiconfound_core::ConditioningMode;

use crate::config::{ExperimentConfig, Overrides};
use crate::error::CliError;
use crate::figures::{run_figure2, run_figures34};
use crate::oracle::{resolve_instance, run_fuzz, run_oracle};
use crate::table::sig10;

#[derive(Debug, Parser)]
#[command(
    name = "epiconfound",
    version,
    about = "Time-varying confounding bias experiments on a stochastic SIR model and exact finite instances"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo replicates per estimate.
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    /// Comma-separated intervention thresholds, strictly increasing in (0, 1).
    #[arg(long, global = true, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Which target prefix a trajectory must match: full-path or per-time.
    #[arg(long, global = true)]
    pub conditioning: Option<ConditioningMode>,
    /// Worker threads (0 or unset uses all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One sample trajectory without intervention.
    Figure2,
    /// Bias evolution and final-day summary for every threshold.
    Figures34,
    /// Exact report for a built-in instance name or an instance file.
    Oracle {
        /// coin-epidemic, exogenous-null, reversed-coin, or a path to a TOML file.
        instance: String,
    },
    /// Checks the sign of the bias on random opportunistic instances.
    FuzzTheorem {
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Rejection-sampling attempts per instance.
        #[arg(long, default_value_t = 10_000)]
        max_attempts: usize,
    },
    /// Prints the effective configuration.
    PrintConfig,
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            replicates: self.replicates,
            thresholds: self.thresholds.clone(),
            out: self.out.clone(),
            conditioning: self.conditioning,
        }
    }

    /// Defaults, then the config file, then command-line flags.
    pub fn effective_config(&self) -> Result<ExperimentConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        config.apply(&self.overrides());
        config.validate()?;
        Ok(config)
    }
}

/// Runs one command, writing the human-readable report to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = cli.effective_config()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let mut report = String::new();
    let result = pool.install(|| dispatch(cli, &config, &mut report));
    stdout
        .write_all(report.as_bytes())
        .map_err(|e| CliError::io(std::path::Path::new("<stdout>"), e))?;
    result
}

fn say(report: &mut String, text: &str) -> Result<(), CliError> {
    report.push_str(text);
    Ok(())
}

fn list_files(files: &[PathBuf]) -> String {
    files
        .iter()
        .map(|f| format!("wrote {}\n", f.display()))
        .collect()
}

fn dispatch(cli: &Cli, config: &ExperimentConfig, stdout: &mut String) -> Result<(), CliError> {
    match &cli.command {
        Command::PrintConfig => say(stdout, &config.to_toml()?),
        Command::Figure2 => {
            let out = run_figure2(config)?;
            let y = out.trajectory.final_outcome().unwrap_or(f64::NAN);
            say(
                stdout,
                &format!(
                    "final cumulative infected share {}\n{}",
                    sig10(y),
                    list_files(&out.files)
                ),
            )
        }
        Command::Figures34 => {
            let out = run_figures34(config)?;
            let mut text = String::from("threshold  causal_T  associational_T  bias_T  retained\n");
            for o in &out.outcomes {
                match &o.report {
                    Ok(r) => text.push_str(&format!(
                        "{}  {:.4}  {:.4}  {:.4}  {}\n",
                        o.threshold,
                        r.causal.mean,
                        r.associational.mean,
                        r.bias,
                        r.associational.replicates_retained
                    )),
                    Err(e) => text.push_str(&format!("{}  {e}\n", o.threshold)),
                }
            }
            text.push_str(&list_files(&out.files));
            say(stdout, &text)
        }
        Command::Oracle { instance } => {
            let inst = resolve_instance(instance)?;
            let out = run_oracle(&inst, Some(&config.experiment.out))?;
            say(stdout, &format!("{}{}", out.text, list_files(&out.files)))?;
            match out.violations() {
                0 => Ok(()),
                violations => Err(CliError::TheoremViolation {
                    violations,
                    checked: out.targets.len(),
                }),
            }
        }
        Command::FuzzTheorem {
            count,
            max_attempts,
        } => {
            let out = run_fuzz(
                config.experiment.seed,
                *count,
                *max_attempts,
                Some(&config.experiment.out),
            )?;
            say(
                stdout,
                &format!(
                    "{}/{} theorem_respected\n{}",
                    out.respected,
                    out.checked,
                    list_files(&out.files)
                ),
            )?;
            if out.respected < out.checked {
                return Err(CliError::TheoremViolation {
                    violations: out.checked - out.respected,
                    checked: out.checked,
                });
            }
            Ok(())
        }
    }
}
