//! Observer macrostates, branch decomposition, and Born-rule sampling.
//!
//! A state over a layout whose first register is the observer macrostate
//! register splits into branches `|O_k⟩|U_k⟩`, one per macrostate with
//! nonzero weight. Branch weights are squared norms of the environment
//! factors and give the observer's self-location probabilities.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::layout::SpaceLayout;
use crate::rng::uniform_f64;
use crate::state::StateVector;

/// Squared-norm threshold below which a branch is dropped as construction
/// noise. Well under double-precision rounding of any physical branch.
pub const BRANCH_PRUNE_TOL: f64 = 1e-15;

/// Function of a macrostate in the memory-reset protocol.
///
/// `Backup` is the state recorded at backup time, `Restored` and
/// `RestoredDisaster` are the distinct just-restored successors the erasure
/// map targets, and the remaining roles form the branching-cycle ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacrostateRole {
    /// Macrostate whose contents were backed up.
    Backup,
    /// Post-reset state restored from the backup.
    Restored,
    /// Post-reset state restored from a disaster-correlated backup.
    RestoredDisaster,
    /// Cycle state that learned of an impending disaster (resets).
    Disaster,
    /// Cycle state whose reset is triggered pseudo-randomly (resets).
    PseudoReset,
    /// Cycle state that will not reset.
    NoReset,
}

/// One observer macrostate: a label plus its protocol flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Macrostate {
    label: String,
    role: MacrostateRole,
}

impl Macrostate {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn role(&self) -> MacrostateRole {
        self.role
    }

    pub fn knows_disaster(&self) -> bool {
        self.role == MacrostateRole::Disaster
    }

    pub fn reset_scheduled(&self) -> bool {
        matches!(self.role, MacrostateRole::Disaster | MacrostateRole::PseudoReset)
    }
}

/// The observer's finite macrostate register.
///
/// The pseudo-random reset fraction is realized exactly by construction:
/// among the `n_no_disaster` cycle macrostates without disaster knowledge,
/// exactly `round(q · n_no_disaster)` carry the reset flag. The realized
/// fraction is reported alongside the requested one.
#[derive(Debug, Clone, PartialEq)]
pub struct MacrostateRegister {
    states: Vec<Macrostate>,
    requested_q: f64,
    scheduled: usize,
    no_disaster: usize,
}

impl MacrostateRegister {
    /// Lays out backup and restored bookkeeping states, `n_disaster` states
    /// that know of a disaster, and `n_no_disaster` states that do not, with
    /// the backup placed at `backup_index` and the remaining roles filling
    /// the other indices in canonical order.
    pub fn for_disaster_protocol(
        q: f64,
        n_no_disaster: usize,
        n_disaster: usize,
        backup_index: usize,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidProbability { name: "q", value: q });
        }
        if n_no_disaster < 1 || n_disaster < 1 {
            return Err(Error::MacrostateCountTooSmall {
                requested: 3 + n_disaster + n_no_disaster,
                minimum: 5,
            });
        }
        let count = 3 + n_disaster + n_no_disaster;
        if backup_index >= count {
            return Err(Error::DimensionMismatch { expected: count, actual: backup_index });
        }
        let scheduled = libm::round(q * n_no_disaster as f64) as usize;

        let mut roles = Vec::with_capacity(count);
        roles.push((String::from("backup"), MacrostateRole::Backup));
        roles.push((String::from("restored"), MacrostateRole::Restored));
        roles.push((String::from("restored-disaster"), MacrostateRole::RestoredDisaster));
        for i in 0..n_disaster {
            roles.push((format!("disaster-{i}"), MacrostateRole::Disaster));
        }
        for i in 0..n_no_disaster {
            let (label, role) = if i < scheduled {
                (format!("pseudo-reset-{i}"), MacrostateRole::PseudoReset)
            } else {
                (format!("no-reset-{i}"), MacrostateRole::NoReset)
            };
            roles.push((label, role));
        }

        // Backup sits at backup_index; everything else keeps canonical order.
        let mut states = Vec::with_capacity(count);
        let mut rest = roles.drain(1..).collect::<Vec<_>>().into_iter();
        let backup = roles.pop().expect("backup role");
        for index in 0..count {
            let (label, role) = if index == backup_index {
                backup.clone()
            } else {
                rest.next().expect("role for every index")
            };
            states.push(Macrostate { label, role });
        }

        Ok(MacrostateRegister {
            states,
            requested_q: q,
            scheduled,
            no_disaster: n_no_disaster,
        })
    }

    pub fn count(&self) -> usize {
        self.states.len()
    }

    pub fn macrostate(&self, index: usize) -> &Macrostate {
        &self.states[index]
    }

    pub fn states(&self) -> &[Macrostate] {
        &self.states
    }

    pub fn requested_q(&self) -> f64 {
        self.requested_q
    }

    /// Exact fraction of reset-flagged states among the no-disaster cycle
    /// macrostates.
    pub fn realized_q(&self) -> f64 {
        self.scheduled as f64 / self.no_disaster as f64
    }

    pub fn index_of_role(&self, role: MacrostateRole) -> Option<usize> {
        self.states.iter().position(|s| s.role == role)
    }

    pub fn indices_of_role(&self, role: MacrostateRole) -> Vec<usize> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.role == role)
            .map(|(i, _)| i)
            .collect()
    }
}

/// One term `|O_k⟩|U_k⟩` of a branch decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// Observer macrostate index of this branch.
    pub macrostate_index: usize,
    /// Unnormalized environment factor `|U_k⟩`.
    pub environment_state: StateVector,
    /// Squared norm of the environment factor.
    pub weight: f64,
}

/// All nonzero-weight branches of a state, in macrostate order.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchDecomposition {
    branches: Vec<Branch>,
    total_weight: f64,
    layout: Arc<SpaceLayout>,
}

impl BranchDecomposition {
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn branch_for(&self, macrostate_index: usize) -> Option<&Branch> {
        self.branches.iter().find(|b| b.macrostate_index == macrostate_index)
    }

    pub fn weight_of(&self, macrostate_index: usize) -> f64 {
        self.branch_for(macrostate_index).map_or(0.0, |b| b.weight)
    }

    /// Normalized Born probabilities `(macrostate, weight / total)`.
    pub fn born_weights(&self) -> Result<Vec<(usize, f64)>> {
        if self.total_weight <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        Ok(self
            .branches
            .iter()
            .map(|b| (b.macrostate_index, b.weight / self.total_weight))
            .collect())
    }

    /// Draws a macrostate index with Born probabilities via inverse-CDF over
    /// the retained branches in macrostate order.
    pub fn sample_macrostate(&self, rng: &mut impl RngCore) -> Result<usize> {
        if self.total_weight <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        let r = uniform_f64(rng) * self.total_weight;
        let mut cumulative = 0.0;
        for branch in &self.branches {
            cumulative += branch.weight;
            if r < cumulative {
                return Ok(branch.macrostate_index);
            }
        }
        Ok(self.branches.last().expect("nonzero total weight").macrostate_index)
    }

    /// Reassembles `Σ_k |O_k⟩|U_k⟩` over the original layout.
    pub fn reconstruct(&self) -> Result<StateVector> {
        let total = self.layout.total_dim();
        let stride = self.layout.stride(0);
        let mut amps = alloc::vec![crate::state::Amplitude::ZERO; total];
        for branch in &self.branches {
            let base = branch.macrostate_index * stride;
            amps[base..base + stride].copy_from_slice(branch.environment_state.amplitudes());
        }
        StateVector::from_amplitudes(Arc::clone(&self.layout), amps)
    }
}

/// Splits a state into macrostate branches along its first register.
///
/// Branch `k` holds exactly the amplitude slice with observer digit `k`;
/// branches with squared norm below [`BRANCH_PRUNE_TOL`] are dropped.
pub fn decompose(psi: &StateVector) -> Result<BranchDecomposition> {
    let layout = psi.layout();
    if layout.register_count() < 2 {
        return Err(Error::InvalidLayout(String::from(
            "decompose needs an observer register followed by environment registers",
        )));
    }
    let env_layout = Arc::new(SpaceLayout::new(
        layout.registers()[1..]
            .iter()
            .map(|r| (String::from(r.name()), r.dim())),
    )?);
    let macrostates = layout.dim(0);
    let stride = layout.stride(0);
    let amps = psi.amplitudes();
    let mut branches = Vec::new();
    let mut total_weight = 0.0;
    for k in 0..macrostates {
        let slice = &amps[k * stride..(k + 1) * stride];
        let weight: f64 = slice.iter().map(|a| a.norm_sqr()).sum();
        if weight < BRANCH_PRUNE_TOL {
            continue;
        }
        total_weight += weight;
        branches.push(Branch {
            macrostate_index: k,
            environment_state: StateVector::from_amplitudes(
                Arc::clone(&env_layout),
                slice.to_vec(),
            )?,
            weight,
        });
    }
    Ok(BranchDecomposition {
        branches,
        total_weight,
        layout: Arc::clone(psi.layout_arc()),
    })
}

/// Normalized projection onto one macrostate: `|O_k⟩|U_k⟩ / ‖U_k‖`.
///
/// Used only by the collapse interpretation; projecting onto a macrostate
/// with no weight is an error.
pub fn collapse_to(psi: &StateVector, macrostate_index: usize) -> Result<StateVector> {
    let projected = psi.project_register(0, macrostate_index);
    projected
        .normalize()
        .map_err(|_| Error::EmptyBranch { macrostate: macrostate_index })
}
