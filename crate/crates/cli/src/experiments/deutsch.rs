//! The reversible-measurement experiment driver.

use anyhow::Result;
use branchsim_core::interpret::Interpretation;
use branchsim_core::protocols::{DeutschConfig, DeutschExperiment, DeutschMode};
use rayon::prelude::*;

use crate::config::DeutschRun;
use crate::output::{
    fmt_f64, mode_label, write_deutsch_csv, CheckList, DeutschRecord, Summary,
};
use crate::seed::{derive_trial_seed, trial_rng};
use crate::stats::wilson_band_around;

/// Exact x-up probability the protocol must reproduce.
fn expected_p_x_up(mode: DeutschMode, interpretation: Interpretation) -> f64 {
    match (mode, interpretation) {
        (DeutschMode::Reversible, Interpretation::ManyWorlds) => 1.0,
        _ => 0.5,
    }
}

pub fn run(run: &DeutschRun) -> Result<bool> {
    let experiment = DeutschExperiment::new(DeutschConfig { mode: run.mode })?;
    let mut summary = Summary::new();
    let mut checks = CheckList::new();
    summary.push("experiment", "deutsch");
    summary.push("mode", mode_label(run.mode));
    summary.push("seed", run.seed.to_string());

    let mut records = Vec::new();
    for &interpretation in &run.interpretations {
        let label = interpretation.label();
        let exact = experiment.p_x_up_exact(interpretation)?;
        println!("P(x-up) = {} (exact, {label}, {})", fmt_f64(exact), mode_label(run.mode));
        summary.push_f64(format!("p_x_up_exact[{label}]"), exact);
        let expected = expected_p_x_up(run.mode, interpretation);
        checks.record(
            format!("deutsch-exact[{label}]"),
            (exact - expected).abs() <= 1e-10,
            format!("exact {} vs expected {}", fmt_f64(exact), fmt_f64(expected)),
        );

        if !run.exact_only {
            let trials: Vec<DeutschRecord> = (0..run.trials)
                .into_par_iter()
                .map(|index| {
                    let mut rng = trial_rng(run.seed, index);
                    let outcome = experiment
                        .run_trial(interpretation, &mut rng)
                        .expect("trial on a validated experiment");
                    DeutschRecord {
                        trial: index,
                        seed: derive_trial_seed(run.seed, index),
                        interpretation,
                        mode: run.mode,
                        outcome,
                    }
                })
                .collect();
            let ups = trials.iter().filter(|r| r.outcome.x_up).count();
            let empirical = ups as f64 / run.trials as f64;
            let band = wilson_band_around(exact, run.trials as f64);
            summary.push_f64(format!("p_x_up_empirical[{label}]"), empirical);
            summary.push(
                format!("p_x_up_wilson95[{label}]"),
                format!("[{}, {}]", fmt_f64(band.lo), fmt_f64(band.hi)),
            );
            checks.record(
                format!("deutsch-monte-carlo[{label}]"),
                band.contains(empirical),
                format!(
                    "empirical {} in Wilson band [{}, {}] around {}",
                    fmt_f64(empirical),
                    fmt_f64(band.lo),
                    fmt_f64(band.hi),
                    fmt_f64(exact)
                ),
            );
            records.extend(trials);
        }
    }

    if !run.exact_only {
        summary.push("trials_per_interpretation", run.trials.to_string());
    }
    write_deutsch_csv(&run.out, &records)?;
    summary.push("csv", run.out.display().to_string());
    summary.print_stdout();
    summary.write_csv(&run.out)?;
    checks.print_stdout();
    Ok(checks.all_passed())
}
