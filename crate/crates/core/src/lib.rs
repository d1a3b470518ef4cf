//! Exact state-vector simulation of observer branching and memory erasure.
//!
//! The crate models a universe as a dense complex amplitude vector over
//! named tensor-product registers, with the observer's macrostate register
//! first. On top of that sit branch decomposition and Born-rule sampling,
//! two measurement protocols (reversible measurement with an optional
//! environment dump, and the memory-reset branching cycle), two execution
//! semantics (Many-Worlds and collapse), and an exact classical probability
//! tree that serves as an independent oracle for every reset and disaster
//! probability.
//!
//! The crate is `no_std` (with `alloc`); IO, CLI, and file formats live in
//! the companion `branchsim-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod interpret;
pub mod layout;
pub mod observer;
pub mod operator;
pub mod oracle;
pub mod protocols;
pub mod rng;
pub mod state;

pub use error::{Error, Result};
pub use interpret::{execute, statistics_equal, ExecutionTrace, Interpretation, Schedule};
pub use layout::SpaceLayout;
pub use observer::{decompose, BranchDecomposition, MacrostateRegister};
pub use operator::Operator;
pub use state::{Amplitude, StateVector};
