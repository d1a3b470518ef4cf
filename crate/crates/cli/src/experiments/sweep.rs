//! (p, q) grid sweep: closed form, oracle, quantum, and Monte Carlo columns
//! per cell, including the p ≪ q regime where P_reset → q and P_dis → p/q.

use std::fs::File;
use std::io::{BufWriter, Write};

use anyhow::{Context, Result};
use branchsim_core::oracle;
use branchsim_core::protocols::{
    p_dis_closed_form, p_reset_closed_form, DisasterConfig, DisasterExperiment,
};

use crate::config::SweepRun;
use crate::output::{fmt_f64, CheckList, Summary};
use crate::seed::derive_trial_seed;
use crate::stats::{wilson_interval, Z_95};

pub const SWEEP_HEADER: &str = "p,q,q_realized,p_reset_closed,p_reset_oracle,p_reset_quantum,\
p_dis_closed,p_dis_oracle,p_dis_quantum,p_over_q,\
p_reset_mc,p_reset_lo,p_reset_hi,p_dis_mc,p_dis_lo,p_dis_hi,resets,trials";

struct Cell {
    p: f64,
    q: f64,
    q_realized: f64,
    reset: [f64; 3],
    dis: Option<[f64; 3]>,
    p_over_q: Option<f64>,
    mc: Option<CellMc>,
}

struct CellMc {
    p_reset: f64,
    reset_interval: (f64, f64),
    p_dis: Option<f64>,
    dis_interval: Option<(f64, f64)>,
    resets: u64,
    trials: u64,
}

fn opt(value: Option<f64>) -> String {
    value.map(fmt_f64).unwrap_or_default()
}

pub fn run(run: &SweepRun) -> Result<bool> {
    let mut checks = CheckList::new();
    let mut cells = Vec::new();
    for (cell_index, (&p, &q)) in run
        .p_list
        .iter()
        .flat_map(|p| run.q_list.iter().map(move |q| (p, q)))
        .enumerate()
    {
        let experiment = DisasterExperiment::new(DisasterConfig::new(p, q))?;
        let q_realized = experiment.realized_q();
        let reset = [
            p_reset_closed_form(p, q_realized)?,
            oracle::oracle_p_reset(p, q_realized)?,
            experiment.p_reset_quantum(),
        ];
        let defined = reset[0] > 0.0;
        let dis = if defined {
            Some([
                p_dis_closed_form(p, q_realized)?,
                oracle::oracle_p_dis(p, q_realized)?,
                experiment.p_dis_quantum()?,
            ])
        } else {
            None
        };

        checks.record(
            format!("quantum-vs-oracle[p={},q={}]", fmt_f64(p), fmt_f64(q)),
            (reset[2] - reset[1]).abs() <= 1e-10
                && dis.is_none_or(|d| (d[2] - d[1]).abs() <= 1e-10),
            String::new(),
        );

        let mc = if run.trials > 0 {
            let cell_seed = derive_trial_seed(run.seed, cell_index as u64);
            let stats = super::disaster::run_trials(
                &experiment,
                run.interpretation,
                run.trials,
                cell_seed,
            );
            let reset_iv = wilson_interval(stats.resets as f64, run.trials as f64, Z_95);
            let dis_iv = stats
                .p_dis()
                .map(|_| wilson_interval(stats.disasters as f64, stats.resets as f64, Z_95));
            Some(CellMc {
                p_reset: stats.p_reset(),
                reset_interval: (reset_iv.lo, reset_iv.hi),
                p_dis: stats.p_dis(),
                dis_interval: dis_iv.map(|iv| (iv.lo, iv.hi)),
                resets: stats.resets,
                trials: run.trials,
            })
        } else {
            None
        };

        cells.push(Cell {
            p,
            q,
            q_realized,
            reset,
            dis,
            p_over_q: (q > 0.0).then(|| p / q),
            mc,
        });
    }

    let file = File::create(&run.out)
        .with_context(|| format!("cannot write output file {}", run.out.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{SWEEP_HEADER}")?;
    for c in &cells {
        let mc_cols = match &c.mc {
            Some(mc) => format!(
                "{},{},{},{},{},{},{},{}",
                fmt_f64(mc.p_reset),
                fmt_f64(mc.reset_interval.0),
                fmt_f64(mc.reset_interval.1),
                opt(mc.p_dis),
                opt(mc.dis_interval.map(|iv| iv.0)),
                opt(mc.dis_interval.map(|iv| iv.1)),
                mc.resets,
                mc.trials
            ),
            None => ",,,,,,,".to_string(),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(c.p),
            fmt_f64(c.q),
            fmt_f64(c.q_realized),
            fmt_f64(c.reset[0]),
            fmt_f64(c.reset[1]),
            fmt_f64(c.reset[2]),
            opt(c.dis.map(|d| d[0])),
            opt(c.dis.map(|d| d[1])),
            opt(c.dis.map(|d| d[2])),
            opt(c.p_over_q),
            mc_cols,
        )?;
    }
    out.flush()?;

    let mut summary = Summary::new();
    summary.push("experiment", "sweep");
    summary.push("cells", cells.len().to_string());
    summary.push("interpretation", run.interpretation.label());
    summary.push("trials_per_cell", run.trials.to_string());
    summary.push("seed", run.seed.to_string());
    summary.push("csv", run.out.display().to_string());
    // Aligned grid on stdout.
    println!(
        "{:>8} {:>6} {:>12} {:>12} {:>12} {:>12} {:>10}",
        "p", "q", "P_reset", "P_dis", "p/q", "MC P_reset", "MC P_dis"
    );
    for c in &cells {
        println!(
            "{:>8} {:>6} {:>12} {:>12} {:>12} {:>12} {:>10}",
            fmt_f64(c.p),
            fmt_f64(c.q),
            fmt_f64(c.reset[0]),
            opt(c.dis.map(|d| d[0])),
            opt(c.p_over_q),
            opt(c.mc.as_ref().map(|mc| mc.p_reset)),
            opt(c.mc.as_ref().and_then(|mc| mc.p_dis)),
        );
    }
    summary.print_stdout();
    summary.write_csv(&run.out)?;
    checks.print_stdout();
    Ok(checks.all_passed())
}
