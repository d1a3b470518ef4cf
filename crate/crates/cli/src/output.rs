//! CSV and summary output.
//!
//! Trial CSVs have fixed, documented columns and LF line endings so that
//! identical `(config, seed)` pairs reproduce byte-identical files. Floats
//! are printed in shortest round-trip form. Summaries go to standard output
//! as aligned text and to `<out>.summary.csv` as `metric,value` rows.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use branchsim_core::interpret::Interpretation;
use branchsim_core::protocols::{CycleOutcome, DeutschMode, DeutschTrial, Scenario};

/// Shortest round-trip decimal form of a float.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:?}")
}

pub fn scenario_label(scenario: Scenario) -> &'static str {
    match scenario {
        Scenario::Uncorrelated => "uncorrelated",
        Scenario::CorrelatedBackup => "correlated",
    }
}

pub fn mode_label(mode: DeutschMode) -> &'static str {
    match mode {
        DeutschMode::Reversible => "reversible",
        DeutschMode::EnvironmentDump => "dump",
    }
}

fn memory_label(branch: usize) -> &'static str {
    match branch {
        0 => "unmeasured",
        1 => "saw-up",
        _ => "saw-down",
    }
}

/// One branching-cycle trial row.
pub struct DisasterRecord {
    pub trial: u64,
    pub seed: u64,
    pub interpretation: Interpretation,
    pub scenario: Scenario,
    pub p: f64,
    pub q: f64,
    pub outcome: CycleOutcome,
}

pub const DISASTER_HEADER: &str =
    "trial,seed,interpretation,scenario,p,q,branch_group,reset,disaster_after_reset";

pub fn write_disaster_csv(path: &Path, records: &[DisasterRecord]) -> Result<()> {
    let file = File::create(path)
        .with_context(|| format!("cannot write output file {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{DISASTER_HEADER}")?;
    for r in records {
        let disaster = match r.outcome.disaster_after_reset {
            Some(d) => if d { "true" } else { "false" },
            None => "",
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.trial,
            r.seed,
            r.interpretation.label(),
            scenario_label(r.scenario),
            fmt_f64(r.p),
            fmt_f64(r.q),
            r.outcome.branch_group.label(),
            r.outcome.reset_occurred,
            disaster,
        )?;
    }
    out.flush()?;
    Ok(())
}

/// One reversible-measurement trial row.
pub struct DeutschRecord {
    pub trial: u64,
    pub seed: u64,
    pub interpretation: Interpretation,
    pub mode: DeutschMode,
    pub outcome: DeutschTrial,
}

pub const DEUTSCH_HEADER: &str = "trial,seed,interpretation,mode,memory_branch,x_up";

pub fn write_deutsch_csv(path: &Path, records: &[DeutschRecord]) -> Result<()> {
    let file = File::create(path)
        .with_context(|| format!("cannot write output file {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{DEUTSCH_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.trial,
            r.seed,
            r.interpretation.label(),
            mode_label(r.mode),
            memory_label(r.outcome.memory_branch),
            r.outcome.x_up,
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Aligned-text + CSV summary accumulator.
pub struct Summary {
    rows: Vec<(String, String)>,
}

impl Summary {
    pub fn new() -> Self {
        Summary { rows: Vec::new() }
    }

    pub fn push(&mut self, metric: impl Into<String>, value: impl Into<String>) {
        self.rows.push((metric.into(), value.into()));
    }

    pub fn push_f64(&mut self, metric: impl Into<String>, value: f64) {
        self.push(metric, fmt_f64(value));
    }

    pub fn print_stdout(&self) {
        let width = self.rows.iter().map(|(m, _)| m.len()).max().unwrap_or(0);
        for (metric, value) in &self.rows {
            println!("{metric:<width$}  {value}");
        }
    }

    pub fn write_csv(&self, out_path: &Path) -> Result<()> {
        let path = summary_path(out_path);
        let file = File::create(&path)
            .with_context(|| format!("cannot write summary file {}", path.display()))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "metric,value")?;
        for (metric, value) in &self.rows {
            writeln!(out, "{metric},{value}")?;
        }
        out.flush()?;
        Ok(())
    }
}

impl Default for Summary {
    fn default() -> Self {
        Self::new()
    }
}

pub fn summary_path(out_path: &Path) -> PathBuf {
    let mut name = out_path.as_os_str().to_os_string();
    name.push(".summary.csv");
    PathBuf::from(name)
}

/// Named pass/fail verification checks.
pub struct CheckList {
    checks: Vec<(String, bool, String)>,
}

impl CheckList {
    pub fn new() -> Self {
        CheckList { checks: Vec::new() }
    }

    pub fn record(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push((name.into(), pass, detail.into()));
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|(_, pass, _)| *pass)
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    pub fn passed_count(&self) -> usize {
        self.checks.iter().filter(|(_, pass, _)| *pass).count()
    }

    pub fn print_stdout(&self) {
        for (name, pass, detail) in &self.checks {
            let status = if *pass { "PASS" } else { "FAIL" };
            if detail.is_empty() {
                println!("{status} {name}");
            } else {
                println!("{status} {name} — {detail}");
            }
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path)
            .with_context(|| format!("cannot write report file {}", path.display()))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "check,status,detail")?;
        for (name, pass, detail) in &self.checks {
            let status = if *pass { "pass" } else { "fail" };
            writeln!(out, "{name},{status},\"{detail}\"")?;
        }
        out.flush()?;
        Ok(())
    }
}

impl Default for CheckList {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use branchsim_core::protocols::BranchGroup;

    #[test]
    fn float_formatting_round_trips() {
        assert_eq!(fmt_f64(0.01), "0.01");
        assert_eq!(fmt_f64(1.0), "1.0");
        assert_eq!(fmt_f64(0.109), "0.109");
        for x in [0.1, 1.0 / 3.0, 0.30000000000000004] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn disaster_csv_schema_is_fixed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let records = vec![DisasterRecord {
            trial: 0,
            seed: 42,
            interpretation: Interpretation::ManyWorlds,
            scenario: Scenario::Uncorrelated,
            p: 0.01,
            q: 0.1,
            outcome: CycleOutcome {
                branch_group: BranchGroup::K2,
                reset_occurred: true,
                disaster_after_reset: Some(false),
            },
        }];
        write_disaster_csv(&path, &records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "trial,seed,interpretation,scenario,p,q,branch_group,reset,disaster_after_reset\n\
             0,42,mwi,uncorrelated,0.01,0.1,k2,true,false\n"
        );
    }

    #[test]
    fn missing_disaster_field_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let records = vec![DisasterRecord {
            trial: 3,
            seed: 9,
            interpretation: Interpretation::Collapse,
            scenario: Scenario::CorrelatedBackup,
            p: 0.5,
            q: 0.0,
            outcome: CycleOutcome {
                branch_group: BranchGroup::K3,
                reset_occurred: false,
                disaster_after_reset: None,
            },
        }];
        write_disaster_csv(&path, &records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.ends_with("3,9,collapse,correlated,0.5,0.0,k3,false,\n"));
    }

    #[test]
    fn summary_path_appends_suffix() {
        assert_eq!(
            summary_path(Path::new("runs/x.csv")),
            PathBuf::from("runs/x.csv.summary.csv")
        );
    }
}
