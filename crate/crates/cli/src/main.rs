use std::process::ExitCode;

use branchsim_cli::config::{Cli, Command, ConfigError, DeutschRun, DisasterRun, SweepRun, VerifyRun};
use branchsim_cli::experiments;
use clap::Parser;

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Deutsch(args) => experiments::deutsch::run(&DeutschRun::resolve(&args)?),
        Command::Disaster(args) => experiments::disaster::run(&DisasterRun::resolve(&args)?),
        Command::Sweep(args) => experiments::sweep::run(&SweepRun::resolve(&args)?),
        Command::Verify(args) => experiments::verify::run(&VerifyRun::resolve(&args)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // usage errors exit 2 via clap
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: verification checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
