//! TOML instance files.
//!
//! ```toml
//! name = "coin-epidemic"
//! horizon = 2
//! outcome_values = [0.0, 1.0, 2.0]
//! treatment_levels = 2
//! initial_outcome = 0.0
//! targets = [[0, 0]]
//!
//! # p_t(y_t | a_1..a_t, y_1..y_{t-1}); `outcomes` holds outcome indices
//! [[outcome]]
//! t = 1
//! default = true
//! probs = [0.5, 0.5, 0.0]
//!
//! [[outcome]]
//! t = 2
//! treatments = [0, 0]
//! outcomes = [0]
//! probs = [0.4, 0.6, 0.0]
//!
//! # pi_t(a_{t+1} | a_1..a_t, y_1..y_t)
//! [[rule]]
//! t = 0
//! probs = [1.0, 0.0]
//! ```
//!
//! A row with `default = true` fills every row of its table not listed
//! explicitly. Every table row must end up specified exactly once.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::builtin::Instance;
use crate::dgp::{table_rows, FiniteDgp};
use crate::error::{KernelKind, OracleError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default)]
    pub name: Option<String>,
    pub horizon: usize,
    pub outcome_values: Vec<f64>,
    pub treatment_levels: usize,
    #[serde(default)]
    pub initial_outcome: f64,
    #[serde(default)]
    pub targets: Vec<Vec<usize>>,
    #[serde(default, rename = "outcome")]
    pub outcome_rows: Vec<RowSpec>,
    #[serde(default, rename = "rule")]
    pub rule_rows: Vec<RowSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    pub t: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub default: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub treatments: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outcomes: Vec<usize>,
    pub probs: Vec<f64>,
}

struct TableLayout {
    kind: KernelKind,
    t: usize,
    n_y: usize,
    width: usize,
}

fn fill_tables(
    file: &InstanceFile,
    kind: KernelKind,
    rows: &[RowSpec],
) -> Result<Vec<Vec<f64>>, OracleError> {
    let (k, m, horizon) = (
        file.treatment_levels,
        file.outcome_values.len(),
        file.horizon,
    );
    let layouts: Vec<TableLayout> = match kind {
        KernelKind::Outcome => (1..=horizon)
            .map(|t| TableLayout {
                kind,
                t,
                n_y: t - 1,
                width: m,
            })
            .collect(),
        KernelKind::Rule => (0..horizon)
            .map(|t| TableLayout {
                kind,
                t,
                n_y: t,
                width: k,
            })
            .collect(),
    };
    let first_t = layouts.first().map_or(0, |l| l.t);
    let mut tables = Vec::with_capacity(layouts.len());
    for layout in &layouts {
        let TableLayout {
            kind,
            t,
            n_y,
            width,
        } = *layout;
        let specs: Vec<&RowSpec> = rows.iter().filter(|r| r.t == t).collect();
        let defaults: Vec<&&RowSpec> = specs.iter().filter(|r| r.default).collect();
        if defaults.len() > 1 {
            return Err(OracleError::Parse(format!(
                "{kind} table t={t} has {} default rows",
                defaults.len()
            )));
        }
        let default = defaults.first().map(|r| &r.probs);
        let mut table = Vec::new();
        for (a, y) in table_rows(k, m, t, n_y) {
            let mut matches = specs
                .iter()
                .filter(|r| !r.default && r.treatments == a && r.outcomes == y);
            let probs = match (matches.next(), matches.next()) {
                (Some(_), Some(_)) => {
                    return Err(OracleError::InvalidKernel {
                        kind,
                        t,
                        treatments: a,
                        outcomes: y,
                        reason: "row is listed more than once".into(),
                    })
                }
                (Some(r), None) => &r.probs,
                (None, _) => default.ok_or_else(|| OracleError::InvalidKernel {
                    kind,
                    t,
                    treatments: a.clone(),
                    outcomes: y.clone(),
                    reason: "row is not specified and the table has no default".into(),
                })?,
            };
            if probs.len() != width {
                return Err(OracleError::InvalidKernel {
                    kind,
                    t,
                    treatments: a,
                    outcomes: y,
                    reason: format!("expected {width} probabilities, got {}", probs.len()),
                });
            }
            table.extend_from_slice(probs);
        }
        tables.push(table);
    }
    // rows that address no table row are typos, not defaults
    for r in rows.iter().filter(|r| !r.default) {
        let n_y = match kind {
            KernelKind::Outcome => r.t.checked_sub(1),
            KernelKind::Rule => Some(r.t),
        };
        let in_range = r.t >= first_t && r.t < first_t + horizon;
        let fits = in_range
            && n_y == Some(r.outcomes.len())
            && r.treatments.len() == r.t
            && r.treatments.iter().all(|&a| a < k)
            && r.outcomes.iter().all(|&y| y < m);
        if !fits {
            return Err(OracleError::InvalidKernel {
                kind,
                t: r.t,
                treatments: r.treatments.clone(),
                outcomes: r.outcomes.clone(),
                reason: "row does not address any table row".into(),
            });
        }
    }
    Ok(tables)
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance, OracleError> {
        if self.horizon == 0 || self.outcome_values.is_empty() || self.treatment_levels == 0 {
            return Err(OracleError::InvalidInstance(
                "horizon, outcome_values and treatment_levels must be non-empty".into(),
            ));
        }
        let outcome_kernels = fill_tables(&self, KernelKind::Outcome, &self.outcome_rows)?;
        let rule_kernels = fill_tables(&self, KernelKind::Rule, &self.rule_rows)?;
        let dgp = FiniteDgp::new(
            self.horizon,
            self.outcome_values,
            self.treatment_levels,
            self.initial_outcome,
            outcome_kernels,
            rule_kernels,
        )?;
        for target in &self.targets {
            crate::exact::check_target(&dgp, target)?;
        }
        Ok(Instance {
            name: self.name.unwrap_or_else(|| "unnamed".to_string()),
            dgp,
            targets: self.targets,
        })
    }

    /// Lists every row explicitly.
    pub fn from_instance(instance: &Instance) -> Self {
        let dgp = &instance.dgp;
        let (k, m) = (dgp.treatment_levels(), dgp.outcome_levels());
        let outcome_rows = (1..=dgp.horizon())
            .flat_map(|t| table_rows(k, m, t, t - 1).map(move |(a, y)| (t, a, y)))
            .map(|(t, a, y)| RowSpec {
                t,
                default: false,
                probs: dgp.outcome_row(&a, &y).to_vec(),
                treatments: a,
                outcomes: y,
            })
            .collect();
        let rule_rows = (0..dgp.horizon())
            .flat_map(|t| table_rows(k, m, t, t).map(move |(a, y)| (t, a, y)))
            .map(|(t, a, y)| RowSpec {
                t,
                default: false,
                probs: dgp.rule_row(&a, &y).to_vec(),
                treatments: a,
                outcomes: y,
            })
            .collect();
        Self {
            name: Some(instance.name.clone()),
            horizon: dgp.horizon(),
            outcome_values: dgp.outcome_values().to_vec(),
            treatment_levels: k,
            initial_outcome: dgp.initial_outcome(),
            targets: instance.targets.clone(),
            outcome_rows,
            rule_rows,
        }
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, OracleError> {
    let file: InstanceFile = toml::from_str(text).map_err(|e| OracleError::Parse(e.to_string()))?;
    file.into_instance()
}

pub fn write_instance(instance: &Instance) -> String {
    toml::to_string(&InstanceFile::from_instance(instance))
        .expect("instance files always serialize")
}

/// Reads and validates an instance file.
pub fn load_instance(path: &Path) -> Result<Instance, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_instance(&text)?)
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
