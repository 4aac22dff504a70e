//! Tabular data-generating process over finite outcome and treatment
//! alphabets.
//!
//! Day `t` runs `a_t ~ pi_{t-1}(. | a_1..a_{t-1}, y_1..y_{t-1})` and then
//! `y_t ~ p_t(. | a_1..a_t, y_1..y_{t-1})`. Outcomes are handled as indices
//! into the ordered `outcome_values`; treatments are `0..treatment_levels`.
//! The initial context `y_0` is fixed and is not part of any table index.

use crate::error::{KernelKind, OracleError};

/// Row sums must equal 1 within this tolerance.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Upper bound on stored kernel entries.
pub const MAX_TABLE_ENTRIES: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDgp {
    horizon: usize,
    outcome_values: Vec<f64>,
    treatment_levels: usize,
    initial_outcome: f64,
    /// `outcome_kernels[t - 1]`: rows `(a_1..a_t, y_1..y_{t-1})`, one column
    /// per outcome.
    outcome_kernels: Vec<Vec<f64>>,
    /// `rule_kernels[t]`: rows `(a_1..a_t, y_1..y_t)`, one column per
    /// treatment level of `a_{t+1}`.
    rule_kernels: Vec<Vec<f64>>,
}

/// Number of rows of a kernel indexed by `n_a` treatments and `n_y` outcomes.
pub(crate) fn row_count(k: usize, m: usize, n_a: usize, n_y: usize) -> u128 {
    (k as u128).saturating_pow(n_a as u32) * (m as u128).saturating_pow(n_y as u32)
}

fn encode(k: usize, m: usize, treatments: &[usize], outcomes: &[usize]) -> usize {
    let idx = treatments.iter().fold(0usize, |acc, &a| acc * k + a);
    outcomes.iter().fold(idx, |acc, &y| acc * m + y)
}

/// Odometer over all digit vectors with the given radices, last digit fastest.
pub fn odometer(radices: &[usize]) -> impl Iterator<Item = Vec<usize>> {
    let radices = radices.to_vec();
    let empty = radices.contains(&0);
    let mut next = (!empty).then(|| vec![0usize; radices.len()]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut bumped = current.clone();
        for i in (0..radices.len()).rev() {
            bumped[i] += 1;
            if bumped[i] < radices[i] {
                next = Some(bumped);
                break;
            }
            bumped[i] = 0;
        }
        Some(current)
    })
}

/// All `(treatments, outcomes)` index pairs of a table with `n_a` treatment
/// digits and `n_y` outcome digits, in row order.
pub(crate) fn table_rows(
    k: usize,
    m: usize,
    n_a: usize,
    n_y: usize,
) -> impl Iterator<Item = (Vec<usize>, Vec<usize>)> {
    let radices: Vec<usize> = std::iter::repeat_n(k, n_a)
        .chain(std::iter::repeat_n(m, n_y))
        .collect();
    odometer(&radices).map(move |digits| (digits[..n_a].to_vec(), digits[n_a..].to_vec()))
}

impl FiniteDgp {
    /// Builds an instance from flat kernel tables and validates it.
    pub fn new(
        horizon: usize,
        outcome_values: Vec<f64>,
        treatment_levels: usize,
        initial_outcome: f64,
        outcome_kernels: Vec<Vec<f64>>,
        rule_kernels: Vec<Vec<f64>>,
    ) -> Result<Self, OracleError> {
        let dgp = Self {
            horizon,
            outcome_values,
            treatment_levels,
            initial_outcome,
            outcome_kernels,
            rule_kernels,
        };
        dgp.validate()?;
        Ok(dgp)
    }

    /// Builds an instance by evaluating row functions at every table row.
    ///
    /// `outcome(t, a_1..a_t, y_1..y_{t-1})` returns the distribution of
    /// `y_t`; `rule(t, a_1..a_t, y_1..y_t)` returns the distribution of
    /// `a_{t+1}`.
    pub fn from_fns<O, R>(
        horizon: usize,
        outcome_values: Vec<f64>,
        treatment_levels: usize,
        initial_outcome: f64,
        mut outcome: O,
        mut rule: R,
    ) -> Result<Self, OracleError>
    where
        O: FnMut(usize, &[usize], &[usize]) -> Vec<f64>,
        R: FnMut(usize, &[usize], &[usize]) -> Vec<f64>,
    {
        check_shape(horizon, &outcome_values, treatment_levels)?;
        let (k, m) = (treatment_levels, outcome_values.len());
        let mut outcome_kernels = Vec::with_capacity(horizon);
        let mut rule_kernels = Vec::with_capacity(horizon);
        for t in 1..=horizon {
            let mut table = Vec::new();
            for (a, y) in table_rows(k, m, t, t - 1) {
                table.extend(pad(outcome(t, &a, &y), m));
            }
            outcome_kernels.push(table);
        }
        for t in 0..horizon {
            let mut table = Vec::new();
            for (a, y) in table_rows(k, m, t, t) {
                table.extend(pad(rule(t, &a, &y), k));
            }
            rule_kernels.push(table);
        }
        Self::new(
            horizon,
            outcome_values,
            treatment_levels,
            initial_outcome,
            outcome_kernels,
            rule_kernels,
        )
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn outcome_values(&self) -> &[f64] {
        &self.outcome_values
    }

    pub fn outcome_levels(&self) -> usize {
        self.outcome_values.len()
    }

    pub fn treatment_levels(&self) -> usize {
        self.treatment_levels
    }

    pub fn initial_outcome(&self) -> f64 {
        self.initial_outcome
    }

    pub fn value(&self, outcome: usize) -> f64 {
        self.outcome_values[outcome]
    }

    /// Distribution of `y_t` given `a_1..a_t` and `y_1..y_{t-1}`, where
    /// `t = treatments.len()`.
    pub fn outcome_row(&self, treatments: &[usize], outcomes: &[usize]) -> &[f64] {
        let t = treatments.len();
        debug_assert!(t >= 1 && outcomes.len() + 1 == t);
        let m = self.outcome_levels();
        let row = encode(self.treatment_levels, m, treatments, outcomes);
        &self.outcome_kernels[t - 1][row * m..(row + 1) * m]
    }

    /// Distribution of `a_{t+1}` given `a_1..a_t` and `y_1..y_t`, where
    /// `t = treatments.len()`.
    pub fn rule_row(&self, treatments: &[usize], outcomes: &[usize]) -> &[f64] {
        let t = treatments.len();
        debug_assert!(outcomes.len() == t);
        let k = self.treatment_levels;
        let row = encode(k, self.outcome_levels(), treatments, outcomes);
        &self.rule_kernels[t][row * k..(row + 1) * k]
    }

    pub fn outcome_prob(&self, treatments: &[usize], outcomes: &[usize], y: usize) -> f64 {
        self.outcome_row(treatments, outcomes)[y]
    }

    pub fn rule_prob(&self, treatments: &[usize], outcomes: &[usize], a: usize) -> f64 {
        self.rule_row(treatments, outcomes)[a]
    }

    /// Returns a copy with the rule tables replaced by `rule`.
    pub fn with_rule<R>(&self, mut rule: R) -> Result<Self, OracleError>
    where
        R: FnMut(usize, &[usize], &[usize]) -> Vec<f64>,
    {
        let (k, m) = (self.treatment_levels, self.outcome_levels());
        let rule_kernels = (0..self.horizon)
            .map(|t| {
                table_rows(k, m, t, t)
                    .flat_map(|(a, y)| pad(rule(t, &a, &y), k))
                    .collect()
            })
            .collect();
        Self::new(
            self.horizon,
            self.outcome_values.clone(),
            k,
            self.initial_outcome,
            self.outcome_kernels.clone(),
            rule_kernels,
        )
    }

    /// Checks alphabet shape, table sizes and every kernel row.
    pub fn validate(&self) -> Result<(), OracleError> {
        check_shape(self.horizon, &self.outcome_values, self.treatment_levels)?;
        let (k, m) = (self.treatment_levels, self.outcome_levels());
        if self.outcome_kernels.len() != self.horizon || self.rule_kernels.len() != self.horizon {
            return Err(OracleError::InvalidInstance(format!(
                "expected {} outcome and {} rule tables, got {} and {}",
                self.horizon,
                self.horizon,
                self.outcome_kernels.len(),
                self.rule_kernels.len()
            )));
        }
        for t in 1..=self.horizon {
            let rows = row_count(k, m, t, t - 1) as usize;
            check_table(
                KernelKind::Outcome,
                t,
                &self.outcome_kernels[t - 1],
                rows,
                m,
                k,
                m,
                t - 1,
            )?;
        }
        for t in 0..self.horizon {
            let rows = row_count(k, m, t, t) as usize;
            check_table(KernelKind::Rule, t, &self.rule_kernels[t], rows, k, k, m, t)?;
        }
        Ok(())
    }
}

fn pad(mut row: Vec<f64>, width: usize) -> Vec<f64> {
    row.resize(width, f64::NAN);
    row
}

fn check_shape(
    horizon: usize,
    outcome_values: &[f64],
    treatment_levels: usize,
) -> Result<(), OracleError> {
    if horizon == 0 {
        return Err(OracleError::InvalidInstance("horizon must be >= 1".into()));
    }
    if outcome_values.is_empty() {
        return Err(OracleError::InvalidInstance(
            "outcome alphabet is empty".into(),
        ));
    }
    if outcome_values.iter().any(|v| !v.is_finite()) {
        return Err(OracleError::InvalidInstance(
            "outcome values must be finite".into(),
        ));
    }
    if outcome_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(OracleError::InvalidInstance(
            "outcome values must be strictly increasing".into(),
        ));
    }
    if treatment_levels == 0 {
        return Err(OracleError::InvalidInstance(
            "treatment alphabet is empty".into(),
        ));
    }
    let (k, m) = (treatment_levels, outcome_values.len());
    let entries = row_count(k, m, horizon, horizon);
    if entries > MAX_TABLE_ENTRIES {
        return Err(OracleError::InstanceTooLarge {
            size: entries,
            cap: MAX_TABLE_ENTRIES,
        });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn check_table(
    kind: KernelKind,
    t: usize,
    table: &[f64],
    rows: usize,
    width: usize,
    k: usize,
    m: usize,
    n_y: usize,
) -> Result<(), OracleError> {
    if table.len() != rows * width {
        return Err(OracleError::InvalidInstance(format!(
            "{kind} table at t={t} has {} entries, expected {}",
            table.len(),
            rows * width
        )));
    }
    // both kernels at index t carry t treatment digits
    for ((a, y), row) in table_rows(k, m, t, n_y).zip(table.chunks(width)) {
        let bad = |reason: String| OracleError::InvalidKernel {
            kind,
            t,
            treatments: a.clone(),
            outcomes: y.clone(),
            reason,
        };
        if let Some(p) = row.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(bad(format!(
                "entry {p} is not a finite non-negative number"
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(bad(format!("row sums to {sum}")));
        }
    }
    Ok(())
}
