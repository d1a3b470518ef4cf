//! Full verification battery: every exact identity, operator check, and
//! Monte Carlo consistency bound, each reported as one pass/fail line.

use anyhow::Result;
use branchsim_core::interpret::{execute, statistics_equal, Interpretation};
use branchsim_core::observer::{decompose, MacrostateRole};
use branchsim_core::oracle;
use branchsim_core::protocols::{
    deutsch_p_x_up, p_dis_closed_form, p_reset_closed_form, DeutschConfig, DeutschExperiment,
    DeutschMode, DisasterConfig, DisasterExperiment, Scenario,
};
use branchsim_core::rng::uniform_f64;

use crate::config::VerifyRun;
use crate::output::{fmt_f64, write_disaster_csv, CheckList};
use crate::seed::{derive_trial_seed, trial_rng};
use crate::stats::wilson_band_around;

pub const P_GRID: [f64; 7] = [0.0, 0.01, 0.1, 0.2, 0.5, 0.9, 1.0];
pub const Q_GRID: [f64; 5] = [0.0, 0.1, 0.25, 0.5, 1.0];

fn check_deutsch_exact(checks: &mut CheckList) -> Result<()> {
    let cases = [
        (DeutschMode::Reversible, Interpretation::ManyWorlds, 1.0),
        (DeutschMode::Reversible, Interpretation::Collapse, 0.5),
        (DeutschMode::EnvironmentDump, Interpretation::ManyWorlds, 0.5),
        (DeutschMode::EnvironmentDump, Interpretation::Collapse, 0.5),
    ];
    for (mode, interpretation, expected) in cases {
        let exact = deutsch_p_x_up(DeutschConfig { mode }, interpretation)?;
        checks.record(
            format!("deutsch-exact[{:?},{}]", mode, interpretation.label()),
            (exact - expected).abs() <= 1e-10,
            format!("{} vs {}", fmt_f64(exact), fmt_f64(expected)),
        );
    }
    Ok(())
}

fn check_deutsch_sampling(checks: &mut CheckList, seed: u64) -> Result<()> {
    let trials = 10_000u64;
    let reversible = DeutschExperiment::new(DeutschConfig { mode: DeutschMode::Reversible })?;
    let mut mwi_ups = 0u64;
    let mut collapse_ups = 0u64;
    for index in 0..trials {
        let mut rng = trial_rng(seed, index);
        if reversible.run_trial(Interpretation::ManyWorlds, &mut rng)?.x_up {
            mwi_ups += 1;
        }
        let mut rng = trial_rng(seed.wrapping_add(1), index);
        if reversible.run_trial(Interpretation::Collapse, &mut rng)?.x_up {
            collapse_ups += 1;
        }
    }
    checks.record(
        "deutsch-reversible-mwi-sampled",
        mwi_ups == trials,
        format!("{mwi_ups}/{trials} x-up (Many-Worlds predicts every trial)"),
    );
    let rate = collapse_ups as f64 / trials as f64;
    checks.record(
        "deutsch-reversible-collapse-sampled",
        (rate - 0.5).abs() <= 0.02,
        format!("x-up rate {} vs 0.5 ± 0.02", fmt_f64(rate)),
    );

    // Post-dump indistinguishability at 10^4 trials per interpretation.
    let dump = DeutschExperiment::new(DeutschConfig { mode: DeutschMode::EnvironmentDump })?;
    let mut rng_a = trial_rng(seed.wrapping_add(2), 0);
    let mut rng_b = trial_rng(seed.wrapping_add(3), 0);
    let mwi: Vec<_> = (0..trials)
        .map(|_| execute(dump.schedule(), dump.initial_state(), Interpretation::ManyWorlds, &mut rng_a))
        .collect::<branchsim_core::Result<_>>()?;
    let collapse: Vec<_> = (0..trials)
        .map(|_| execute(dump.schedule(), dump.initial_state(), Interpretation::Collapse, &mut rng_b))
        .collect::<branchsim_core::Result<_>>()?;
    checks.record(
        "deutsch-dump-indistinguishable",
        statistics_equal(&mwi, &collapse, 0.03)?,
        format!("all readout distributions agree within 0.03 at {trials} trials"),
    );
    Ok(())
}

fn check_grid(checks: &mut CheckList, trials_per_cell: u64, seed: u64) -> Result<()> {
    let mut triple_worst = 0.0f64;
    let mut identity_worst = 0.0f64;
    let mut unitarity_worst = 0.0f64;
    let mut erasure_worst = 0.0f64;
    let mut coverage_hits = 0usize;
    let mut coverage_total = 0usize;

    for (cell, (&p, &q)) in P_GRID
        .iter()
        .flat_map(|p| Q_GRID.iter().map(move |q| (p, q)))
        .enumerate()
    {
        let experiment = DisasterExperiment::new(DisasterConfig::new(p, q))?;
        let q_realized = experiment.realized_q();
        let closed_reset = p_reset_closed_form(p, q_realized)?;
        let oracle_reset = oracle::oracle_p_reset(p, q_realized)?;
        let quantum_reset = experiment.p_reset_quantum();
        triple_worst = triple_worst
            .max((closed_reset - oracle_reset).abs())
            .max((closed_reset - quantum_reset).abs())
            .max((oracle_reset - quantum_reset).abs());

        let defined = closed_reset > 0.0;
        let mut closed_dis = None;
        if defined {
            let cd = p_dis_closed_form(p, q_realized)?;
            let od = oracle::oracle_p_dis(p, q_realized)?;
            let qd = experiment.p_dis_quantum()?;
            triple_worst = triple_worst
                .max((cd - od).abs())
                .max((cd - qd).abs())
                .max((od - qd).abs());
            identity_worst = identity_worst.max((closed_reset * cd - p).abs());
            closed_dis = Some(cd);
        }

        unitarity_worst = unitarity_worst
            .max(experiment.cycle_unitary().max_unitarity_deviation())
            .max(experiment.erasure_unitary().max_unitarity_deviation());

        // Erasure concentrates all reset weight on the restored successors.
        let post = decompose(experiment.post_erasure_state())?;
        let successors: f64 = [MacrostateRole::Restored, MacrostateRole::RestoredDisaster]
            .iter()
            .filter_map(|&role| experiment.register().index_of_role(role))
            .map(|k| post.weight_of(k))
            .sum();
        erasure_worst = erasure_worst.max((successors - quantum_reset).abs());
        for (k, state) in experiment.register().states().iter().enumerate() {
            if state.reset_scheduled() {
                erasure_worst = erasure_worst.max(post.weight_of(k));
            }
        }

        // Monte Carlo coverage across both interpretations.
        for (offset, interpretation) in
            [Interpretation::ManyWorlds, Interpretation::Collapse].into_iter().enumerate()
        {
            let cell_seed = derive_trial_seed(seed, (1000 + 2 * cell + offset) as u64);
            let stats = super::disaster::run_trials(
                &experiment,
                interpretation,
                trials_per_cell,
                cell_seed,
            );
            coverage_total += 1;
            if wilson_band_around(closed_reset, trials_per_cell as f64).contains(stats.p_reset())
            {
                coverage_hits += 1;
            }
            if let (Some(exact), Some(empirical)) = (closed_dis, stats.p_dis()) {
                coverage_total += 1;
                if wilson_band_around(exact, stats.resets as f64).contains(empirical) {
                    coverage_hits += 1;
                }
            }
        }
    }

    checks.record(
        "grid-triple-agreement",
        triple_worst <= 1e-10,
        format!("worst pairwise gap {:.3e} over the (p, q) grid", triple_worst),
    );
    checks.record(
        "grid-reset-times-disaster-identity",
        identity_worst <= 1e-12,
        format!("worst |P_reset·P_dis − p| = {:.3e}", identity_worst),
    );
    checks.record(
        "grid-operator-unitarity",
        unitarity_worst <= 1e-10,
        format!("worst ‖U†U − I‖_max = {:.3e}", unitarity_worst),
    );
    checks.record(
        "grid-erasure-concentration",
        erasure_worst <= 1e-12,
        format!("worst residual weight {:.3e}", erasure_worst),
    );
    let coverage = coverage_hits as f64 / coverage_total as f64;
    checks.record(
        "grid-wilson-coverage",
        coverage >= 0.93,
        format!(
            "{coverage_hits}/{coverage_total} empirical rates inside their 95% bands ({:.1}%)",
            coverage * 100.0
        ),
    );
    Ok(())
}

fn check_limit(checks: &mut CheckList) -> Result<()> {
    let (p, q) = (0.001, 0.2);
    let exact = p_dis_closed_form(p, q)?;
    let approximation = p / q;
    let relative = (exact - approximation).abs() / exact;
    checks.record(
        "small-p-limit",
        relative <= 0.005 && relative <= q,
        format!(
            "P_dis exact {} vs p/q {} (relative gap {:.4})",
            fmt_f64(exact),
            fmt_f64(approximation),
            relative
        ),
    );
    Ok(())
}

fn check_correlated(checks: &mut CheckList) -> Result<()> {
    let cfg = DisasterConfig::new(0.2, 0.5).with_scenario(Scenario::CorrelatedBackup);
    let experiment = DisasterExperiment::new(cfg)?;
    let k1 = experiment.register().indices_of_role(MacrostateRole::Disaster)[0];
    let k2 = experiment.register().indices_of_role(MacrostateRole::PseudoReset)[0];
    let mut worst = 0.0f64;
    for interpretation in [Interpretation::ManyWorlds, Interpretation::Collapse] {
        worst = worst
            .max((experiment.disaster_prob_given_branch(k1, interpretation)? - 1.0).abs())
            .max(experiment.disaster_prob_given_branch(k2, interpretation)?.abs());
    }
    checks.record(
        "correlated-backup-determinism",
        worst <= 1e-12,
        format!("worst deviation from {{1, 0}} outcomes: {:.3e}", worst),
    );
    Ok(())
}

fn check_oracle_random_points(checks: &mut CheckList, seed: u64) -> Result<()> {
    let mut rng = trial_rng(seed, 999_983);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = uniform_f64(&mut rng);
        let q = uniform_f64(&mut rng);
        let reset_gap =
            (oracle::oracle_p_reset(p, q)? - p_reset_closed_form(p, q)?).abs();
        worst = worst.max(reset_gap);
        if p_reset_closed_form(p, q)? > 0.0 {
            let dis_gap = (oracle::oracle_p_dis(p, q)? - p_dis_closed_form(p, q)?).abs();
            worst = worst.max(dis_gap);
        }
    }
    checks.record(
        "oracle-vs-closed-form-random",
        worst <= 1e-12,
        format!("worst gap {:.3e} over 1000 random (p, q) points", worst),
    );
    Ok(())
}

fn check_csv_determinism(checks: &mut CheckList, seed: u64) -> Result<()> {
    let experiment = DisasterExperiment::new(DisasterConfig::new(0.2, 0.5))?;
    let dir = std::env::temp_dir();
    let suffix = derive_trial_seed(seed, 0xC5F);
    let path_a = dir.join(format!("branchsim-verify-{suffix:x}-a.csv"));
    let path_b = dir.join(format!("branchsim-verify-{suffix:x}-b.csv"));
    for path in [&path_a, &path_b] {
        let stats =
            super::disaster::run_trials(&experiment, Interpretation::Collapse, 500, seed);
        write_disaster_csv(path, &stats.records)?;
    }
    let identical = std::fs::read(&path_a)? == std::fs::read(&path_b)?;
    let _ = std::fs::remove_file(&path_a);
    let _ = std::fs::remove_file(&path_b);
    checks.record(
        "csv-bit-reproducibility",
        identical,
        "two runs with the same config and seed produce identical bytes",
    );
    Ok(())
}

pub fn run(run: &VerifyRun) -> Result<bool> {
    let mut checks = CheckList::new();
    check_deutsch_exact(&mut checks)?;
    check_deutsch_sampling(&mut checks, run.seed)?;
    check_grid(&mut checks, run.trials_per_cell, run.seed)?;
    check_limit(&mut checks)?;
    check_correlated(&mut checks)?;
    check_oracle_random_points(&mut checks, run.seed)?;
    check_csv_determinism(&mut checks, run.seed)?;
    checks.print_stdout();
    println!("{}/{} checks passed", checks.passed_count(), checks.len());
    if let Some(out) = &run.out {
        checks.write_csv(out)?;
    }
    Ok(checks.all_passed())
}
