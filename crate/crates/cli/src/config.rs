//! Experiment configuration.
//!
//! TOML with two sections; every key is optional and falls back to the
//! reference scenario.
//!
//! ```toml
//! [model]
//! population = 1000000.0
//! initial_infected = 200.0
//! beta = 0.2857142857142857
//! gamma = 0.14285714285714285
//! lambda = -0.2
//! overdispersion = 500.0
//! horizon = 100
//!
//! [experiment]
//! seed = 1
//! replicates = 100000
//! thresholds = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3]
//! out = "out"
//! conditioning = "full-path"
//! ```

use std::path::{Path, PathBuf};

use epiconfound_core::{ConditioningMode, SirParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_THRESHOLDS: [f64; 6] = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: SirParams,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// Master seed; every random stream is derived from it.
    pub seed: u64,
    pub replicates: usize,
    pub thresholds: Vec<f64>,
    pub out: PathBuf,
    pub conditioning: ConditioningMode,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            seed: 1,
            replicates: 100_000,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            out: PathBuf::from("out"),
            conditioning: ConditioningMode::FullPath,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub thresholds: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub conditioning: Option<ConditioningMode>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        let exp = &mut self.experiment;
        if let Some(seed) = overrides.seed {
            exp.seed = seed;
        }
        if let Some(n) = overrides.replicates {
            exp.replicates = n;
        }
        if let Some(t) = &overrides.thresholds {
            exp.thresholds = t.clone();
        }
        if let Some(out) = &overrides.out {
            exp.out = out.clone();
        }
        if let Some(mode) = overrides.conditioning {
            exp.conditioning = mode;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let exp = &self.experiment;
        if exp.replicates < 1 {
            return Err(CliError::Config("replicates must be >= 1".into()));
        }
        // TOML integers are signed 64-bit
        if exp.seed > i64::MAX as u64 {
            return Err(CliError::Config(format!(
                "seed {} exceeds {}",
                exp.seed,
                i64::MAX
            )));
        }
        if exp.thresholds.is_empty() {
            return Err(CliError::Config(
                "at least one threshold is required".into(),
            ));
        }
        if let Some(t) = exp.thresholds.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(CliError::Config(format!("threshold {t} is outside (0, 1)")));
        }
        if exp.thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config(
                "thresholds must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.model.horizon, 100);
        assert_eq!(cfg.experiment.replicates, 100_000);
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_sections_keep_other_defaults() {
        let cfg = ExperimentConfig::parse(
            "[model]\npopulation = 1e4\n[experiment]\nconditioning = \"per-time\"\n",
        )
        .unwrap();
        assert_eq!(cfg.model.population, 1e4);
        assert_eq!(cfg.model.initial_infected, 200.0);
        assert_eq!(cfg.experiment.conditioning, ConditioningMode::PerTime);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::parse("[model]\npopulaton = 5.0\n").is_err());
        assert!(ExperimentConfig::parse("[extra]\n").is_err());
    }

    #[test]
    fn serialized_config_parses_back() {
        let mut cfg = ExperimentConfig::default();
        cfg.experiment.thresholds = vec![0.1, 0.2];
        cfg.model.lambda = -0.35;
        let back = ExperimentConfig::parse(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn overrides_win() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply(&Overrides {
            seed: Some(9),
            thresholds: Some(vec![0.2]),
            ..Overrides::default()
        });
        assert_eq!(cfg.experiment.seed, 9);
        assert_eq!(cfg.experiment.thresholds, vec![0.2]);
        assert_eq!(cfg.experiment.replicates, 100_000);
    }

    #[test]
    fn validation_catches_bad_thresholds() {
        let mut cfg = ExperimentConfig::default();
        for bad in [vec![], vec![0.2, 0.1], vec![0.1, 0.1], vec![0.0], vec![1.0]] {
            cfg.experiment.thresholds = bad;
            assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        }
        cfg.experiment.thresholds = vec![0.1];
        cfg.experiment.replicates = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn validation_checks_the_model() {
        let mut cfg = ExperimentConfig::default();
        cfg.model.gamma = 0.0;
        assert!(cfg.validate().is_err());
    }
}
