//! The memory-reset branching-cycle driver.

use anyhow::Result;
use branchsim_core::interpret::Interpretation;
use branchsim_core::oracle;
use branchsim_core::protocols::{
    p_dis_closed_form, p_reset_closed_form, DisasterConfig, DisasterExperiment, Scenario,
};
use rayon::prelude::*;

use crate::config::DisasterRun;
use crate::output::{
    fmt_f64, scenario_label, write_disaster_csv, CheckList, DisasterRecord, Summary,
};
use crate::seed::{derive_trial_seed, trial_rng};
use crate::stats::wilson_band_around;

pub fn build_config(run: &DisasterRun) -> DisasterConfig {
    let mut cfg = DisasterConfig::new(run.p, run.q).with_scenario(run.scenario);
    if let Some(m) = run.macrostates {
        cfg = cfg.with_macrostate_count(m);
    }
    cfg
}

/// Monte Carlo rates of one batch of trials.
pub struct TrialStats {
    pub records: Vec<DisasterRecord>,
    pub resets: u64,
    pub disasters: u64,
}

impl TrialStats {
    pub fn p_reset(&self) -> f64 {
        self.resets as f64 / self.records.len() as f64
    }

    pub fn p_dis(&self) -> Option<f64> {
        (self.resets > 0).then(|| self.disasters as f64 / self.resets as f64)
    }
}

/// Runs `trials` seeded trials of a prebuilt experiment.
pub fn run_trials(
    experiment: &DisasterExperiment,
    interpretation: Interpretation,
    trials: u64,
    master_seed: u64,
) -> TrialStats {
    let cfg = experiment.config();
    let records: Vec<DisasterRecord> = (0..trials)
        .into_par_iter()
        .map(|index| {
            let mut rng = trial_rng(master_seed, index);
            let outcome = experiment
                .run_trial(interpretation, &mut rng)
                .expect("trial on a validated experiment");
            DisasterRecord {
                trial: index,
                seed: derive_trial_seed(master_seed, index),
                interpretation,
                scenario: cfg.scenario,
                p: cfg.p,
                q: cfg.q,
                outcome,
            }
        })
        .collect();
    let resets = records.iter().filter(|r| r.outcome.reset_occurred).count() as u64;
    let disasters = records
        .iter()
        .filter(|r| r.outcome.disaster_after_reset == Some(true))
        .count() as u64;
    TrialStats { records, resets, disasters }
}

pub fn run(run: &DisasterRun) -> Result<bool> {
    let cfg = build_config(run);
    let experiment = DisasterExperiment::new(cfg)?;
    let q_realized = experiment.realized_q();

    let mut summary = Summary::new();
    let mut checks = CheckList::new();
    summary.push("experiment", "disaster");
    summary.push("scenario", scenario_label(run.scenario));
    summary.push_f64("p", run.p);
    summary.push_f64("q_requested", run.q);
    summary.push_f64("q_realized", q_realized);
    summary.push("macrostates", experiment.register().count().to_string());
    summary.push("seed", run.seed.to_string());
    summary.push("trials_per_interpretation", run.trials.to_string());

    let (k1, k2, k3) = experiment.group_weights();
    summary.push_f64("weight_k1", k1);
    summary.push_f64("weight_k2", k2);
    summary.push_f64("weight_k3", k3);

    // Exact values: closed form (at realized q), classical oracle, quantum.
    let closed_reset = p_reset_closed_form(run.p, q_realized)?;
    let oracle_reset = oracle::oracle_p_reset(run.p, q_realized)?;
    let quantum_reset = experiment.p_reset_quantum();
    summary.push_f64("p_reset_closed_form", closed_reset);
    summary.push_f64("p_reset_oracle", oracle_reset);
    summary.push_f64("p_reset_quantum", quantum_reset);
    checks.record(
        "reset-triple-agreement",
        (closed_reset - oracle_reset).abs() <= 1e-10
            && (closed_reset - quantum_reset).abs() <= 1e-10
            && (oracle_reset - quantum_reset).abs() <= 1e-10,
        format!(
            "closed {} / oracle {} / quantum {}",
            fmt_f64(closed_reset),
            fmt_f64(oracle_reset),
            fmt_f64(quantum_reset)
        ),
    );

    let defined = closed_reset > 0.0;
    let mut closed_dis = None;
    if defined {
        let cd = p_dis_closed_form(run.p, q_realized)?;
        let od = oracle::oracle_p_dis(run.p, q_realized)?;
        let qd = experiment.p_dis_quantum()?;
        summary.push_f64("p_dis_closed_form", cd);
        summary.push_f64("p_dis_oracle", od);
        summary.push_f64("p_dis_quantum", qd);
        checks.record(
            "disaster-triple-agreement",
            (cd - od).abs() <= 1e-10 && (cd - qd).abs() <= 1e-10 && (od - qd).abs() <= 1e-10,
            format!("closed {} / oracle {} / quantum {}", fmt_f64(cd), fmt_f64(od), fmt_f64(qd)),
        );
        checks.record(
            "reset-times-disaster-identity",
            (closed_reset * cd - run.p).abs() <= 1e-12,
            format!("{} · {} vs p = {}", fmt_f64(closed_reset), fmt_f64(cd), fmt_f64(run.p)),
        );
        closed_dis = Some(cd);
    } else {
        summary.push("p_dis_closed_form", "undefined (no reset ever happens)");
    }

    let mut all_records = Vec::new();
    for &interpretation in &run.interpretations {
        let label = interpretation.label();
        let stats = run_trials(&experiment, interpretation, run.trials, run.seed);
        let empirical_reset = stats.p_reset();
        summary.push_f64(format!("p_reset_empirical[{label}]"), empirical_reset);
        let band = wilson_band_around(closed_reset, run.trials as f64);
        summary.push(
            format!("p_reset_wilson95[{label}]"),
            format!("[{}, {}]", fmt_f64(band.lo), fmt_f64(band.hi)),
        );
        checks.record(
            format!("reset-monte-carlo[{label}]"),
            band.contains(empirical_reset),
            format!(
                "empirical {} in Wilson band [{}, {}] around {}",
                fmt_f64(empirical_reset),
                fmt_f64(band.lo),
                fmt_f64(band.hi),
                fmt_f64(closed_reset)
            ),
        );
        if let (Some(exact), Some(empirical)) = (closed_dis, stats.p_dis()) {
            summary.push_f64(format!("p_dis_empirical[{label}]"), empirical);
            let band = wilson_band_around(exact, stats.resets as f64);
            summary.push(
                format!("p_dis_wilson95[{label}]"),
                format!("[{}, {}]", fmt_f64(band.lo), fmt_f64(band.hi)),
            );
            checks.record(
                format!("disaster-monte-carlo[{label}]"),
                band.contains(empirical),
                format!(
                    "empirical {} in Wilson band [{}, {}] around {}",
                    fmt_f64(empirical),
                    fmt_f64(band.lo),
                    fmt_f64(band.hi),
                    fmt_f64(exact)
                ),
            );
        }

        if run.scenario == Scenario::CorrelatedBackup {
            // Per-branch outcomes are pinned in the correlated scenario.
            let consistent = stats.records.iter().all(|r| {
                use branchsim_core::protocols::BranchGroup;
                match r.outcome.branch_group {
                    BranchGroup::K1 => r.outcome.disaster_after_reset == Some(true),
                    BranchGroup::K2 => r.outcome.disaster_after_reset == Some(false),
                    BranchGroup::K3 => r.outcome.disaster_after_reset.is_none(),
                }
            });
            checks.record(
                format!("correlated-branch-determinism[{label}]"),
                consistent,
                "k1 always finds the disaster, k2 never does",
            );
        }
        all_records.extend(stats.records);
    }

    write_disaster_csv(&run.out, &all_records)?;
    summary.push("csv", run.out.display().to_string());
    summary.print_stdout();
    summary.write_csv(&run.out)?;
    checks.print_stdout();
    Ok(checks.all_passed())
}
