//! Experiment harness for the branchsim simulator: deterministic seeded
//! Monte Carlo, Wilson-interval checks, CSV output, and the verification
//! battery behind the `branchsim` binary.

pub mod config;
pub mod experiments;
pub mod output;
pub mod seed;
pub mod stats;
