//! End-to-end protocol checks: exact values, interpretation discrimination,
//! and the agreement between closed forms, the classical oracle, and the
//! quantum branch-weight computation.

use branchsim_core::interpret::{execute, statistics_equal, ExecutionTrace, Interpretation};
use branchsim_core::oracle;
use branchsim_core::protocols::{
    deutsch_p_x_up, p_dis_closed_form, p_reset_closed_form, BranchGroup, DeutschConfig,
    DeutschExperiment, DeutschMode, DisasterConfig, DisasterExperiment, Scenario,
};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

const P_GRID: [f64; 7] = [0.0, 0.01, 0.1, 0.2, 0.5, 0.9, 1.0];
const Q_GRID: [f64; 5] = [0.0, 0.1, 0.25, 0.5, 1.0];

fn deutsch_traces(
    mode: DeutschMode,
    interpretation: Interpretation,
    trials: usize,
    seed: u64,
) -> Vec<ExecutionTrace> {
    let experiment = DeutschExperiment::new(DeutschConfig { mode }).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            execute(
                experiment.schedule(),
                experiment.initial_state(),
                interpretation,
                &mut rng,
            )
            .unwrap()
        })
        .collect()
}

#[test]
fn reversible_measurement_discriminates_interpretations() {
    let mwi = deutsch_traces(DeutschMode::Reversible, Interpretation::ManyWorlds, 10_000, 1);
    let collapse = deutsch_traces(DeutschMode::Reversible, Interpretation::Collapse, 10_000, 2);
    // Terminal x statistics are 1.0 vs 0.5: the sets must differ.
    assert!(!statistics_equal(&mwi, &collapse, 0.03).unwrap());
}

#[test]
fn environment_dump_erases_the_discrimination() {
    let mwi = deutsch_traces(DeutschMode::EnvironmentDump, Interpretation::ManyWorlds, 10_000, 3);
    let collapse =
        deutsch_traces(DeutschMode::EnvironmentDump, Interpretation::Collapse, 10_000, 4);
    assert!(statistics_equal(&mwi, &collapse, 0.03).unwrap());
}

#[test]
fn deutsch_trial_sampler_matches_exact_values() {
    let experiment = DeutschExperiment::new(DeutschConfig { mode: DeutschMode::Reversible }).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let mut ups = 0usize;
    for _ in 0..4000 {
        let trial = experiment.run_trial(Interpretation::ManyWorlds, &mut rng).unwrap();
        assert!(trial.memory_branch == 1 || trial.memory_branch == 2);
        if trial.x_up {
            ups += 1;
        }
    }
    assert_eq!(ups, 4000); // exact in Many-Worlds: P(x-up) = 1

    let mut ups = 0usize;
    for _ in 0..4000 {
        if experiment.run_trial(Interpretation::Collapse, &mut rng).unwrap().x_up {
            ups += 1;
        }
    }
    let rate = ups as f64 / 4000.0;
    assert!((rate - 0.5).abs() < 0.03, "collapse x-up rate {rate}");
}

#[test]
fn grid_triple_agreement_of_reset_and_disaster_probabilities() {
    for p in P_GRID {
        for q in Q_GRID {
            let experiment = DisasterExperiment::new(DisasterConfig::new(p, q)).unwrap();
            let q_realized = experiment.realized_q();
            assert!(
                (q_realized - q).abs() <= 1e-12,
                "grid q {q} must be realized exactly, got {q_realized}"
            );

            let closed_reset = p_reset_closed_form(p, q_realized).unwrap();
            let oracle_reset = oracle::oracle_p_reset(p, q_realized).unwrap();
            let quantum_reset = experiment.p_reset_quantum();
            assert!((closed_reset - oracle_reset).abs() <= 1e-10);
            assert!((closed_reset - quantum_reset).abs() <= 1e-10);
            assert!((oracle_reset - quantum_reset).abs() <= 1e-10);

            if closed_reset > 0.0 {
                let closed_dis = p_dis_closed_form(p, q_realized).unwrap();
                let oracle_dis = oracle::oracle_p_dis(p, q_realized).unwrap();
                let quantum_dis = experiment.p_dis_quantum().unwrap();
                assert!((closed_dis - oracle_dis).abs() <= 1e-10);
                assert!((closed_dis - quantum_dis).abs() <= 1e-10);
                assert!((oracle_dis - quantum_dis).abs() <= 1e-10);
                // The reset leaves no trace on the overall disaster rate.
                assert!((closed_reset * closed_dis - p).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn cycle_group_weights_match_the_oracle_tree() {
    let (p, q) = (0.2, 0.5);
    let experiment = DisasterExperiment::new(DisasterConfig::new(p, q)).unwrap();
    let (k1, k2, k3) = experiment.group_weights();
    let tree = oracle::enumerate(p, q).unwrap();
    for (group, quantum) in [
        (BranchGroup::K1, k1),
        (BranchGroup::K2, k2),
        (BranchGroup::K3, k3),
    ] {
        let classical: f64 = tree
            .leaves()
            .iter()
            .filter(|l| l.group == group)
            .map(|l| l.probability)
            .sum();
        assert!(
            (quantum - classical).abs() <= 1e-12,
            "{group:?}: quantum {quantum} vs oracle {classical}"
        );
    }
}

#[test]
fn erasure_is_identity_on_non_resetting_branches() {
    use branchsim_core::observer::{collapse_to, MacrostateRole};
    let experiment = DisasterExperiment::new(DisasterConfig::new(0.2, 0.5)).unwrap();
    let k3 = experiment.register().indices_of_role(MacrostateRole::NoReset)[0];
    let branch = collapse_to(experiment.post_cycle_state(), k3).unwrap();
    let erased = experiment
        .erasure_unitary()
        .apply_on(&branch, &["observer", "dump"])
        .unwrap();
    assert_eq!(erased.amplitudes(), branch.amplitudes());
}

#[test]
fn built_operators_pass_the_unitarity_check_on_the_grid() {
    for p in [0.0, 0.2, 1.0] {
        for q in Q_GRID {
            let experiment = DisasterExperiment::new(DisasterConfig::new(p, q)).unwrap();
            assert!(experiment.cycle_unitary().max_unitarity_deviation() <= 1e-10);
            assert!(experiment.erasure_unitary().max_unitarity_deviation() <= 1e-10);
        }
    }
}

#[test]
fn schedule_execution_agrees_with_the_sampled_fast_path() {
    let cfg = DisasterConfig::new(0.2, 0.5);
    let experiment = DisasterExperiment::new(cfg).unwrap();
    let schedule = experiment.schedule();
    let trials = 4000usize;

    // Collapse: run the full schedule and read groups off the first readout.
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    let mut schedule_resets = 0usize;
    let mut schedule_disasters = 0usize;
    for _ in 0..trials {
        let trace = execute(
            &schedule,
            experiment.initial_state(),
            Interpretation::Collapse,
            &mut rng,
        )
        .unwrap();
        let k = trace.readouts[0].sampled_value().unwrap();
        let group = experiment.group_of(k).unwrap();
        if group != BranchGroup::K3 {
            schedule_resets += 1;
            if trace.readouts[2].sampled_value().unwrap() == 1 {
                schedule_disasters += 1;
            }
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let mut fast_resets = 0usize;
    let mut fast_disasters = 0usize;
    for _ in 0..trials {
        let outcome = experiment.run_trial(Interpretation::Collapse, &mut rng).unwrap();
        if outcome.reset_occurred {
            fast_resets += 1;
            if outcome.disaster_after_reset.unwrap() {
                fast_disasters += 1;
            }
        }
    }

    let schedule_reset_rate = schedule_resets as f64 / trials as f64;
    let fast_reset_rate = fast_resets as f64 / trials as f64;
    assert!((schedule_reset_rate - 0.6).abs() < 0.03);
    assert!((fast_reset_rate - 0.6).abs() < 0.03);
    let schedule_dis = schedule_disasters as f64 / schedule_resets as f64;
    let fast_dis = fast_disasters as f64 / fast_resets as f64;
    assert!((schedule_dis - 1.0 / 3.0).abs() < 0.04);
    assert!((fast_dis - 1.0 / 3.0).abs() < 0.04);
}

#[test]
fn reset_statistics_are_classically_reproducible() {
    // The schedule's readout statistics agree across interpretations: the
    // reset bookkeeping has a trivial classical reading even though the
    // post-reset outcome is not predetermined per observer.
    let cfg = DisasterConfig::new(0.2, 0.5);
    let experiment = DisasterExperiment::new(cfg).unwrap();
    let schedule = experiment.schedule();
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let run = |interp, rng: &mut ChaCha12Rng| -> Vec<ExecutionTrace> {
        (0..5_000)
            .map(|_| execute(&schedule, experiment.initial_state(), interp, rng).unwrap())
            .collect()
    };
    let mwi = run(Interpretation::ManyWorlds, &mut rng);
    let collapse = run(Interpretation::Collapse, &mut rng);
    assert!(statistics_equal(&mwi, &collapse, 0.03).unwrap());
}

#[test]
fn correlated_backup_trials_are_deterministic_per_branch() {
    let cfg = DisasterConfig::new(0.3, 0.5).with_scenario(Scenario::CorrelatedBackup);
    let experiment = DisasterExperiment::new(cfg).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    for interp in [Interpretation::ManyWorlds, Interpretation::Collapse] {
        for _ in 0..2000 {
            let outcome = experiment.run_trial(interp, &mut rng).unwrap();
            match outcome.branch_group {
                BranchGroup::K1 => assert_eq!(outcome.disaster_after_reset, Some(true)),
                BranchGroup::K2 => assert_eq!(outcome.disaster_after_reset, Some(false)),
                BranchGroup::K3 => assert_eq!(outcome.disaster_after_reset, None),
            }
        }
    }
}

#[test]
fn small_p_limit_approaches_p_over_q() {
    let (p, q) = (0.001, 0.2);
    let exact = p_dis_closed_form(p, q).unwrap();
    let approximation = p / q;
    assert!((exact - approximation).abs() / exact <= q); // first-order bound
    assert!((exact - approximation).abs() / exact <= 0.005);
    let experiment = DisasterExperiment::new(DisasterConfig::new(p, q)).unwrap();
    assert!((experiment.p_dis_quantum().unwrap() - exact).abs() <= 1e-10);
    assert!((experiment.p_reset_quantum() - p_reset_closed_form(p, q).unwrap()).abs() <= 1e-10);
}

#[test]
fn oracle_agrees_with_closed_forms_on_random_points() {
    let mut rng = ChaCha12Rng::seed_from_u64(10);
    use rand::Rng;
    for _ in 0..1000 {
        let p: f64 = rng.gen_range(0.0..=1.0);
        let q: f64 = rng.gen_range(0.0..=1.0);
        let reset = oracle::oracle_p_reset(p, q).unwrap();
        assert!((reset - p_reset_closed_form(p, q).unwrap()).abs() <= 1e-12);
        if reset > 0.0 {
            let dis = oracle::oracle_p_dis(p, q).unwrap();
            assert!((dis - p_dis_closed_form(p, q).unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn deutsch_exact_table() {
    let rev = DeutschConfig { mode: DeutschMode::Reversible };
    let dump = DeutschConfig { mode: DeutschMode::EnvironmentDump };
    assert!((deutsch_p_x_up(rev, Interpretation::ManyWorlds).unwrap() - 1.0).abs() <= 1e-10);
    assert!((deutsch_p_x_up(rev, Interpretation::Collapse).unwrap() - 0.5).abs() <= 1e-10);
    assert!((deutsch_p_x_up(dump, Interpretation::ManyWorlds).unwrap() - 0.5).abs() <= 1e-10);
    assert!((deutsch_p_x_up(dump, Interpretation::Collapse).unwrap() - 0.5).abs() <= 1e-10);
}
