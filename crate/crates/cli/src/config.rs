//! Command-line and config-file handling.
//!
//! Every experiment accepts a flat UTF-8 `key=value` config file via
//! `--config`; explicit command-line flags win over file entries, which win
//! over defaults. Keys use the long flag names (`p`, `q`, `trials`, `seed`,
//! `interpretation`, `scenario`, `mode`, `macrostates`, `out`, `p-list`,
//! `q-list`, `exact`).

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use branchsim_core::interpret::Interpretation;
use branchsim_core::protocols::{DeutschMode, Scenario};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Invalid configuration: reported on stderr with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()).into())
}

#[derive(Parser)]
#[command(
    name = "branchsim",
    version,
    about = "State-vector experiments on observer branching and memory erasure"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Reversible measurement of an x-polarized spin, with optional
    /// environment dump, under both interpretations.
    Deutsch(DeutschArgs),
    /// One memory-reset branching cycle: reset and post-reset disaster
    /// statistics against the closed forms.
    Disaster(DisasterArgs),
    /// Grid of (p, q) cells with closed-form, oracle, quantum, and Monte
    /// Carlo columns.
    Sweep(SweepArgs),
    /// Run the full verification battery and report per-check pass/fail.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InterpretationArg {
    Mwi,
    Collapse,
    Both,
}

impl InterpretationArg {
    pub fn interpretations(self) -> Vec<Interpretation> {
        match self {
            InterpretationArg::Mwi => vec![Interpretation::ManyWorlds],
            InterpretationArg::Collapse => vec![Interpretation::Collapse],
            InterpretationArg::Both => {
                vec![Interpretation::ManyWorlds, Interpretation::Collapse]
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Reversible,
    Dump,
}

impl ModeArg {
    pub fn mode(self) -> DeutschMode {
        match self {
            ModeArg::Reversible => DeutschMode::Reversible,
            ModeArg::Dump => DeutschMode::EnvironmentDump,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Uncorrelated,
    Correlated,
}

impl ScenarioArg {
    pub fn scenario(self) -> Scenario {
        match self {
            ScenarioArg::Uncorrelated => Scenario::Uncorrelated,
            ScenarioArg::Correlated => Scenario::CorrelatedBackup,
        }
    }
}

#[derive(Args)]
pub struct DeutschArgs {
    /// Disposal of the measurement record
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub interpretation: Option<InterpretationArg>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path (summary goes to <out>.summary.csv)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report exact probabilities only, no sampling
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct DisasterArgs {
    /// Probability of learning about a disaster during the cycle
    #[arg(long)]
    pub p: Option<f64>,
    /// Pseudo-random reset fraction
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioArg>,
    #[arg(long, value_enum)]
    pub interpretation: Option<InterpretationArg>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Total macrostate count (default: smallest register realizing q)
    #[arg(long)]
    pub macrostates: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Comma-separated p values
    #[arg(long = "p-list")]
    pub p_list: Option<String>,
    /// Comma-separated q values
    #[arg(long = "q-list")]
    pub q_list: Option<String>,
    #[arg(long, value_enum)]
    pub interpretation: Option<InterpretationArg>,
    /// Monte Carlo trials per cell (0 disables sampling columns)
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo trials per grid cell
    #[arg(long)]
    pub trials: Option<u64>,
    /// Optional path for the per-check report CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parsed key=value config file.
pub struct FileConfig(HashMap<String, String>);

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return config_err(format!(
                        "{}:{}: expected key=value, got '{raw}'",
                        path.display(),
                        lineno + 1
                    ));
                };
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(FileConfig(map))
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(value) => Ok(Some(value)),
                Err(e) => config_err(format!("key '{key}': {e}")),
            },
        }
    }

    fn value_enum<T: ValueEnum>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => match T::from_str(raw, true) {
                Ok(value) => Ok(Some(value)),
                Err(e) => config_err(format!("key '{key}': {e}")),
            },
        }
    }
}

fn parse_float_list(raw: &str, key: &str) -> Result<Vec<f64>> {
    let values: std::result::Result<Vec<f64>, _> =
        raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() => Ok(v),
        Ok(_) => config_err(format!("{key} must not be empty")),
        Err(e) => config_err(format!("{key}: {e}")),
    }
}

fn check_probability(name: &str, value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        return config_err(format!("{name} = {value} is outside [0, 1]"));
    }
    Ok(value)
}

fn check_trials(trials: u64) -> Result<u64> {
    if trials == 0 {
        return config_err("trials must be at least 1");
    }
    Ok(trials)
}

/// Resolved deutsch experiment.
#[derive(Debug)]
pub struct DeutschRun {
    pub mode: DeutschMode,
    pub interpretations: Vec<Interpretation>,
    pub trials: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub exact_only: bool,
}

impl DeutschRun {
    pub fn resolve(args: &DeutschArgs) -> Result<Self> {
        let file = FileConfig::load(args.config.as_deref())?;
        let mode = args
            .mode
            .or(file.value_enum::<ModeArg>("mode")?)
            .unwrap_or(ModeArg::Reversible);
        let interpretation = args
            .interpretation
            .or(file.value_enum::<InterpretationArg>("interpretation")?)
            .unwrap_or(InterpretationArg::Both);
        let trials = check_trials(
            args.trials.or(file.parsed("trials")?).unwrap_or(10_000),
        )?;
        let seed = args.seed.or(file.parsed("seed")?).unwrap_or(1);
        let out = args
            .out
            .clone()
            .or(file.parsed("out")?)
            .unwrap_or_else(|| PathBuf::from("deutsch.csv"));
        let exact_only = args.exact || file.parsed("exact")?.unwrap_or(false);
        Ok(DeutschRun {
            mode: mode.mode(),
            interpretations: interpretation.interpretations(),
            trials,
            seed,
            out,
            exact_only,
        })
    }
}

/// Resolved disaster experiment.
#[derive(Debug)]
pub struct DisasterRun {
    pub p: f64,
    pub q: f64,
    pub scenario: Scenario,
    pub interpretations: Vec<Interpretation>,
    pub trials: u64,
    pub seed: u64,
    pub macrostates: Option<usize>,
    pub out: PathBuf,
}

impl DisasterRun {
    pub fn resolve(args: &DisasterArgs) -> Result<Self> {
        let file = FileConfig::load(args.config.as_deref())?;
        let p = check_probability("p", args.p.or(file.parsed("p")?).unwrap_or(0.01))?;
        let q = check_probability("q", args.q.or(file.parsed("q")?).unwrap_or(0.1))?;
        let scenario = args
            .scenario
            .or(file.value_enum::<ScenarioArg>("scenario")?)
            .unwrap_or(ScenarioArg::Uncorrelated);
        let interpretation = args
            .interpretation
            .or(file.value_enum::<InterpretationArg>("interpretation")?)
            .unwrap_or(InterpretationArg::Both);
        let trials = check_trials(
            args.trials.or(file.parsed("trials")?).unwrap_or(10_000),
        )?;
        let seed = args.seed.or(file.parsed("seed")?).unwrap_or(1);
        let macrostates = args.macrostates.or(file.parsed("macrostates")?);
        let out = args
            .out
            .clone()
            .or(file.parsed("out")?)
            .unwrap_or_else(|| PathBuf::from("disaster.csv"));
        Ok(DisasterRun {
            p,
            q,
            scenario: scenario.scenario(),
            interpretations: interpretation.interpretations(),
            trials,
            seed,
            macrostates,
            out,
        })
    }
}

/// Resolved sweep.
#[derive(Debug)]
pub struct SweepRun {
    pub p_list: Vec<f64>,
    pub q_list: Vec<f64>,
    pub interpretation: Interpretation,
    pub trials: u64,
    pub seed: u64,
    pub out: PathBuf,
}

impl SweepRun {
    pub fn resolve(args: &SweepArgs) -> Result<Self> {
        let file = FileConfig::load(args.config.as_deref())?;
        let p_raw = args
            .p_list
            .clone()
            .or(file.parsed("p-list")?)
            .unwrap_or_else(|| "0.001,0.01,0.1,0.5".to_string());
        let q_raw = args
            .q_list
            .clone()
            .or(file.parsed("q-list")?)
            .unwrap_or_else(|| "0,0.1,0.25,0.5".to_string());
        let p_list = parse_float_list(&p_raw, "p-list")?;
        let q_list = parse_float_list(&q_raw, "q-list")?;
        for &p in &p_list {
            check_probability("p-list entry", p)?;
        }
        for &q in &q_list {
            check_probability("q-list entry", q)?;
        }
        let interpretation = match args
            .interpretation
            .or(file.value_enum::<InterpretationArg>("interpretation")?)
            .unwrap_or(InterpretationArg::Mwi)
        {
            InterpretationArg::Both => {
                return config_err("sweep takes a single interpretation (mwi or collapse)");
            }
            InterpretationArg::Mwi => Interpretation::ManyWorlds,
            InterpretationArg::Collapse => Interpretation::Collapse,
        };
        let trials = args.trials.or(file.parsed("trials")?).unwrap_or(10_000);
        let seed = args.seed.or(file.parsed("seed")?).unwrap_or(1);
        let out = args
            .out
            .clone()
            .or(file.parsed("out")?)
            .unwrap_or_else(|| PathBuf::from("sweep.csv"));
        Ok(SweepRun { p_list, q_list, interpretation, trials, seed, out })
    }
}

/// Resolved verification battery.
#[derive(Debug)]
pub struct VerifyRun {
    pub seed: u64,
    pub trials_per_cell: u64,
    pub out: Option<PathBuf>,
}

impl VerifyRun {
    pub fn resolve(args: &VerifyArgs) -> Result<Self> {
        let file = FileConfig::load(args.config.as_deref())?;
        let seed = args.seed.or(file.parsed("seed")?).unwrap_or(1);
        let trials_per_cell =
            check_trials(args.trials.or(file.parsed("trials")?).unwrap_or(2_000))?;
        let out = args.out.clone().or(file.parsed("out")?);
        Ok(VerifyRun { seed, trials_per_cell, out })
    }
}
