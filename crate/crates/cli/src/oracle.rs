//! Exact reports for finite instances and the theorem fuzzer.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use epiconfound_oracle::{
    builtin, load_instance, random_opportunistic_instance, verify_theorem1, FiniteDgp, Instance,
    LoadError, OracleError, TheoremCheck, BUILTIN_NAMES,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::table::{join_indices, opt_sig10, sig10, Table};

pub const ORACLE_SUMMARY_HEADER: &str =
    "target,g_formula,associational,bias,opportunistic_everywhere,theorem_respected";
pub const ORACLE_TIMES_HEADER: &str =
    "target,t,nonconstant,condition_i,condition_ii,opportunistic,margin,skipped";
pub const ORACLE_RATIOS_HEADER: &str =
    "target,t,previous_outcomes,y_t,value,ratio,adaptation,moving_marginal";
pub const FUZZ_HEADER: &str =
    "index,horizon,outcome_levels,target,g_formula,associational,bias,theorem_respected";

pub const ORACLE_SUMMARY_CSV: &str = "oracle_summary.csv";
pub const ORACLE_TIMES_CSV: &str = "oracle_times.csv";
pub const ORACLE_RATIOS_CSV: &str = "oracle_ratios.csv";
pub const FUZZ_CSV: &str = "fuzz_theorem.csv";

/// Resolves a built-in name, otherwise reads an instance file.
pub fn resolve_instance(spec: &str) -> Result<Instance, CliError> {
    if BUILTIN_NAMES.contains(&spec) {
        return Ok(builtin(spec)?);
    }
    load_instance(Path::new(spec)).map_err(|e| match e {
        LoadError::Io { source, .. } => CliError::io(Path::new(spec), source),
        LoadError::Oracle(e) => CliError::Oracle(e),
    })
}

#[derive(Debug)]
pub struct TargetOutcome {
    pub target: Vec<usize>,
    pub check: Result<TheoremCheck, OracleError>,
}

#[derive(Debug)]
pub struct OracleOutput {
    pub name: String,
    pub targets: Vec<TargetOutcome>,
    pub summary: Table,
    pub times: Table,
    pub ratios: Table,
    pub text: String,
    pub files: Vec<PathBuf>,
}

impl OracleOutput {
    pub fn violations(&self) -> usize {
        self.targets
            .iter()
            .filter(|t| matches!(&t.check, Ok(c) if !c.theorem_respected))
            .count()
    }
}

fn adaptation_label(upweighted: bool, downweighted: bool) -> &'static str {
    match (upweighted, downweighted) {
        (true, _) => "upweighted",
        (_, true) => "downweighted",
        _ => "neutral",
    }
}

/// Full exact report for every target of `instance`; writes CSVs into `out`
/// when given.
pub fn run_oracle(instance: &Instance, out: Option<&Path>) -> Result<OracleOutput, CliError> {
    instance.dgp.validate()?;
    let dgp = &instance.dgp;
    let mut summary = Table::new(ORACLE_SUMMARY_HEADER);
    let mut times = Table::new(ORACLE_TIMES_HEADER);
    let mut ratios = Table::new(ORACLE_RATIOS_HEADER);
    let mut text = format!(
        "instance {} (T = {}, {} outcome levels, {} treatment levels)\n",
        instance.name,
        dgp.horizon(),
        dgp.outcome_levels(),
        dgp.treatment_levels()
    );
    let mut targets = Vec::new();
    for target in &instance.targets {
        let label = join_indices(target);
        let check = verify_theorem1(dgp, target);
        match &check {
            Ok(c) => {
                summary.push(&[
                    label.clone(),
                    sig10(c.g_formula),
                    sig10(c.associational),
                    sig10(c.bias),
                    c.opportunistic_everywhere.to_string(),
                    c.theorem_respected.to_string(),
                ]);
                let _ = writeln!(
                    text,
                    "target {label}: g-formula {}, associational {}, bias {}",
                    sig10(c.g_formula),
                    sig10(c.associational),
                    sig10(c.bias)
                );
                for time in &c.report.times {
                    times.push(&[
                        label.clone(),
                        time.t.to_string(),
                        time.nonconstant.to_string(),
                        time.condition_i.to_string(),
                        time.condition_ii.to_string(),
                        time.opportunistic.to_string(),
                        opt_sig10(time.margin),
                        time.skipped.to_string(),
                    ]);
                    let _ = writeln!(
                        text,
                        "  t = {}: nonconstant {}, condition (i) {}, condition (ii) {}, opportunistic {}, margin {}, skipped {}",
                        time.t,
                        time.nonconstant,
                        time.condition_i,
                        time.condition_ii,
                        time.opportunistic,
                        time.margin.map_or("-".to_string(), sig10),
                        time.skipped
                    );
                    for h in &time.histories {
                        write_history_rows(&mut ratios, dgp, &label, time.t, h);
                    }
                }
                let _ = writeln!(
                    text,
                    "  opportunistic at every adaptive t: {}; theorem respected: {}",
                    c.opportunistic_everywhere, c.theorem_respected
                );
            }
            Err(e) => {
                summary.push(&[
                    label.clone(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
                let _ = writeln!(text, "target {label}: {e}");
            }
        }
        targets.push(TargetOutcome {
            target: target.clone(),
            check,
        });
    }

    let mut files = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (name, table) in [
            (ORACLE_SUMMARY_CSV, &summary),
            (ORACLE_TIMES_CSV, &times),
            (ORACLE_RATIOS_CSV, &ratios),
        ] {
            let path = dir.join(name);
            table.write(&path)?;
            files.push(path);
        }
    }
    Ok(OracleOutput {
        name: instance.name.clone(),
        targets,
        summary,
        times,
        ratios,
        text,
        files,
    })
}

fn write_history_rows(
    table: &mut Table,
    dgp: &FiniteDgp,
    label: &str,
    t: usize,
    h: &epiconfound_oracle::HistoryVerdict,
) {
    let previous = join_indices(&h.previous);
    for &(y, s) in &h.partition.ratios {
        let f = h
            .moving_marginal
            .iter()
            .find(|(v, _)| *v == y)
            .map(|&(_, f)| f);
        table.push(&[
            label.to_string(),
            t.to_string(),
            previous.clone(),
            y.to_string(),
            sig10(dgp.value(y)),
            sig10(s),
            adaptation_label(
                h.partition.upweighted.contains(&y),
                h.partition.downweighted.contains(&y),
            )
            .to_string(),
            opt_sig10(f),
        ]);
    }
}

#[derive(Debug)]
pub struct FuzzOutput {
    pub checked: usize,
    pub respected: usize,
    pub table: Table,
    pub files: Vec<PathBuf>,
}

/// Draws `count` random instances that are opportunistic at every adaptive
/// `t` and checks that each has negative bias.
pub fn run_fuzz(
    seed: u64,
    count: usize,
    max_attempts: usize,
    out: Option<&Path>,
) -> Result<FuzzOutput, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(FUZZ_HEADER);
    let mut respected = 0;
    for index in 0..count {
        let (dgp, target) =
            random_opportunistic_instance(&mut rng, max_attempts).ok_or_else(|| {
                CliError::Config(format!(
                    "no opportunistic instance found in {max_attempts} attempts"
                ))
            })?;
        let check = verify_theorem1(&dgp, &target)?;
        respected += usize::from(check.theorem_respected);
        table.push(&[
            index.to_string(),
            dgp.horizon().to_string(),
            dgp.outcome_levels().to_string(),
            join_indices(&target),
            sig10(check.g_formula),
            sig10(check.associational),
            sig10(check.bias),
            check.theorem_respected.to_string(),
        ]);
    }
    let mut files = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(FUZZ_CSV);
        table.write(&path)?;
        files.push(path);
    }
    Ok(FuzzOutput {
        checked: count,
        respected,
        table,
        files,
    })
}
