//! Execution semantics: Many-Worlds versus collapse.
//!
//! A [`Schedule`] sequences unitary steps and readouts of named registers.
//! Under Many-Worlds the state evolves unitarily throughout: intermediate
//! readouts record branch weights without touching the state, and only
//! terminal readouts draw a Born sample. Under collapse every readout draws
//! a sample and projects the state onto the observed value.

use alloc::string::String;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::observer::{collapse_to, decompose};
use crate::operator::Operator;
use crate::rng::sample_index;
use crate::state::StateVector;

/// Probability mass below which a collapse-enumeration branch is ignored.
const ENUMERATION_TOL: f64 = 1e-14;

/// Execution semantics for a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpretation {
    /// Unitary-only evolution; Born readout without state disturbance.
    ManyWorlds,
    /// Projective measurement at every readout.
    Collapse,
}

impl Interpretation {
    pub fn label(&self) -> &'static str {
        match self {
            Interpretation::ManyWorlds => "mwi",
            Interpretation::Collapse => "collapse",
        }
    }
}

/// Whether a readout is observed mid-protocol or ends it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutKind {
    Intermediate,
    Terminal,
}

/// One step of a protocol schedule.
#[derive(Debug, Clone)]
pub enum Step {
    /// Apply a unitary to the named target registers.
    Apply { op: Operator, targets: Vec<String> },
    /// Read a register in its computational basis.
    Readout { register: String, kind: ReadoutKind },
    /// Memory-erasure unitary; the last target is the dump ancilla, which
    /// must be in its reference state when the step runs.
    Erase { op: Operator, targets: Vec<String> },
}

/// Ordered protocol steps.
#[derive(Debug, Clone)]
pub struct Schedule {
    steps: Vec<Step>,
}

impl Schedule {
    pub fn new(steps: Vec<Step>) -> Self {
        Schedule { steps }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Checks operator dimensions and register names against a layout.
    pub fn validate(&self, layout: &crate::layout::SpaceLayout) -> Result<()> {
        for step in &self.steps {
            match step {
                Step::Apply { op, targets } | Step::Erase { op, targets } => {
                    let mut dim = 1usize;
                    for t in targets {
                        dim *= layout.dim(layout.register_index(t)?);
                    }
                    if dim != op.dim() {
                        return Err(Error::DimensionMismatch { expected: dim, actual: op.dim() });
                    }
                }
                Step::Readout { register, .. } => {
                    layout.register_index(register)?;
                }
            }
        }
        Ok(())
    }

    pub fn readout_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, Step::Readout { .. }))
            .count()
    }
}

/// Record of one readout in an execution.
#[derive(Debug, Clone, PartialEq)]
pub enum ReadoutRecord {
    /// Branch weights observed without sampling (Many-Worlds intermediate).
    Weights { register: usize, kind: ReadoutKind, probabilities: Vec<f64> },
    /// A sampled value together with the distribution it was drawn from.
    Sampled {
        register: usize,
        kind: ReadoutKind,
        value: usize,
        probability: f64,
        probabilities: Vec<f64>,
    },
}

impl ReadoutRecord {
    pub fn register(&self) -> usize {
        match self {
            ReadoutRecord::Weights { register, .. } => *register,
            ReadoutRecord::Sampled { register, .. } => *register,
        }
    }

    pub fn kind(&self) -> ReadoutKind {
        match self {
            ReadoutRecord::Weights { kind, .. } => *kind,
            ReadoutRecord::Sampled { kind, .. } => *kind,
        }
    }

    /// Distribution this readout represents: recorded weights, or the
    /// point mass of the sampled value.
    pub fn contribution(&self) -> Vec<f64> {
        match self {
            ReadoutRecord::Weights { probabilities, .. } => probabilities.clone(),
            ReadoutRecord::Sampled { value, probabilities, .. } => {
                let mut one_hot = alloc::vec![0.0; probabilities.len()];
                one_hot[*value] = 1.0;
                one_hot
            }
        }
    }

    /// The Born distribution in effect at this readout.
    pub fn probabilities(&self) -> &[f64] {
        match self {
            ReadoutRecord::Weights { probabilities, .. } => probabilities,
            ReadoutRecord::Sampled { probabilities, .. } => probabilities,
        }
    }

    pub fn sampled_value(&self) -> Option<usize> {
        match self {
            ReadoutRecord::Sampled { value, .. } => Some(*value),
            ReadoutRecord::Weights { .. } => None,
        }
    }
}

/// Outcome of running a schedule once.
#[derive(Debug, Clone)]
pub struct ExecutionTrace {
    pub readouts: Vec<ReadoutRecord>,
    pub final_state: StateVector,
}

fn normalized_weights(state: &StateVector, register: usize) -> (Vec<f64>, f64) {
    let mut weights = state.register_weights(register);
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        for w in weights.iter_mut() {
            *w /= total;
        }
    }
    (weights, total)
}

fn check_ancilla_fresh(state: &StateVector, targets: &[String]) -> Result<()> {
    let ancilla = targets.last().ok_or(Error::TraceShapeMismatch)?;
    let reg = state.layout().register_index(ancilla)?;
    if !state.register_in_reference(reg) {
        return Err(Error::AncillaNotFresh { register: ancilla.clone() });
    }
    Ok(())
}

fn apply_step(op: &Operator, targets: &[String], state: &StateVector) -> Result<StateVector> {
    let names: Vec<&str> = targets.iter().map(String::as_str).collect();
    op.apply_on(state, &names)
}

/// Runs a schedule once under the given interpretation.
pub fn execute(
    schedule: &Schedule,
    initial: &StateVector,
    interpretation: Interpretation,
    rng: &mut impl RngCore,
) -> Result<ExecutionTrace> {
    schedule.validate(initial.layout())?;
    let mut state = initial.clone();
    let mut readouts = Vec::new();
    for step in schedule.steps() {
        match step {
            Step::Apply { op, targets } => {
                state = apply_step(op, targets, &state)?;
            }
            Step::Erase { op, targets } => {
                check_ancilla_fresh(&state, targets)?;
                state = apply_step(op, targets, &state)?;
            }
            Step::Readout { register, kind } => {
                let reg = state.layout().register_index(register)?;
                let (probabilities, total) = normalized_weights(&state, reg);
                if total <= 0.0 {
                    return Err(Error::ZeroTotalWeight);
                }
                match (interpretation, kind) {
                    (Interpretation::ManyWorlds, ReadoutKind::Intermediate) => {
                        readouts.push(ReadoutRecord::Weights {
                            register: reg,
                            kind: *kind,
                            probabilities,
                        });
                    }
                    (Interpretation::ManyWorlds, ReadoutKind::Terminal) => {
                        let value = sample_index(&probabilities, 1.0, rng);
                        readouts.push(ReadoutRecord::Sampled {
                            register: reg,
                            kind: *kind,
                            value,
                            probability: probabilities[value],
                            probabilities,
                        });
                    }
                    (Interpretation::Collapse, _) => {
                        let value;
                        if reg == 0 {
                            // The observer register: use the macrostate
                            // decomposition machinery.
                            let d = decompose(&state)?;
                            value = d.sample_macrostate(rng)?;
                            state = collapse_to(&state, value)?;
                        } else {
                            value = sample_index(&probabilities, 1.0, rng);
                            state = state.project_register(reg, value).normalize()?;
                        }
                        readouts.push(ReadoutRecord::Sampled {
                            register: reg,
                            kind: *kind,
                            value,
                            probability: probabilities[value],
                            probabilities,
                        });
                    }
                }
            }
        }
    }
    Ok(ExecutionTrace { readouts, final_state: state })
}

/// Exact per-readout distributions of a schedule, without sampling.
///
/// Many-Worlds evolves the state unitarily and reads off marginal weights.
/// Collapse enumerates every readout outcome, weighting each subtree by its
/// Born probability, so the result is the exact sampling distribution.
pub fn exact_readout_distributions(
    schedule: &Schedule,
    initial: &StateVector,
    interpretation: Interpretation,
) -> Result<Vec<Vec<f64>>> {
    schedule.validate(initial.layout())?;
    match interpretation {
        Interpretation::ManyWorlds => {
            let mut state = initial.clone();
            let mut dists = Vec::new();
            for step in schedule.steps() {
                match step {
                    Step::Apply { op, targets } => state = apply_step(op, targets, &state)?,
                    Step::Erase { op, targets } => {
                        check_ancilla_fresh(&state, targets)?;
                        state = apply_step(op, targets, &state)?;
                    }
                    Step::Readout { register, .. } => {
                        let reg = state.layout().register_index(register)?;
                        let (probabilities, total) = normalized_weights(&state, reg);
                        if total <= 0.0 {
                            return Err(Error::ZeroTotalWeight);
                        }
                        dists.push(probabilities);
                    }
                }
            }
            Ok(dists)
        }
        Interpretation::Collapse => {
            let mut dists: Vec<Vec<f64>> = Vec::with_capacity(schedule.readout_count());
            enumerate_collapse(schedule.steps(), initial.clone(), 1.0, 0, &mut dists)?;
            Ok(dists)
        }
    }
}

fn enumerate_collapse(
    steps: &[Step],
    mut state: StateVector,
    mass: f64,
    readout_pos: usize,
    dists: &mut Vec<Vec<f64>>,
) -> Result<()> {
    let mut idx = 0;
    while idx < steps.len() {
        match &steps[idx] {
            Step::Apply { op, targets } => state = apply_step(op, targets, &state)?,
            Step::Erase { op, targets } => {
                check_ancilla_fresh(&state, targets)?;
                state = apply_step(op, targets, &state)?;
            }
            Step::Readout { register, .. } => {
                let reg = state.layout().register_index(register)?;
                let (probabilities, total) = normalized_weights(&state, reg);
                if total <= 0.0 {
                    return Err(Error::ZeroTotalWeight);
                }
                if dists.len() <= readout_pos {
                    dists.push(alloc::vec![0.0; probabilities.len()]);
                }
                for (v, &p) in probabilities.iter().enumerate() {
                    if p * mass < ENUMERATION_TOL {
                        continue;
                    }
                    dists[readout_pos][v] += mass * p;
                    let collapsed = if reg == 0 {
                        collapse_to(&state, v)?
                    } else {
                        state.project_register(reg, v).normalize()?
                    };
                    enumerate_collapse(
                        &steps[idx + 1..],
                        collapsed,
                        mass * p,
                        readout_pos + 1,
                        dists,
                    )?;
                }
                return Ok(());
            }
        }
        idx += 1;
    }
    Ok(())
}

/// Mean per-readout distributions over a set of traces.
pub fn empirical_distributions(traces: &[ExecutionTrace]) -> Result<Vec<Vec<f64>>> {
    let first = traces.first().ok_or(Error::TraceShapeMismatch)?;
    let mut sums: Vec<Vec<f64>> = first
        .readouts
        .iter()
        .map(|r| alloc::vec![0.0; r.probabilities().len()])
        .collect();
    for trace in traces {
        if trace.readouts.len() != sums.len() {
            return Err(Error::TraceShapeMismatch);
        }
        for (acc, record) in sums.iter_mut().zip(&trace.readouts) {
            let contribution = record.contribution();
            if contribution.len() != acc.len() {
                return Err(Error::TraceShapeMismatch);
            }
            for (a, c) in acc.iter_mut().zip(&contribution) {
                *a += c;
            }
        }
    }
    let n = traces.len() as f64;
    for dist in sums.iter_mut() {
        for v in dist.iter_mut() {
            *v /= n;
        }
    }
    Ok(sums)
}

/// True when all per-readout empirical distributions of the two trace sets
/// agree within `tolerance` in max norm.
pub fn statistics_equal(
    a: &[ExecutionTrace],
    b: &[ExecutionTrace],
    tolerance: f64,
) -> Result<bool> {
    let dist_a = empirical_distributions(a)?;
    let dist_b = empirical_distributions(b)?;
    if dist_a.len() != dist_b.len() {
        return Err(Error::TraceShapeMismatch);
    }
    if let (Some(first_a), Some(first_b)) = (a.first(), b.first()) {
        for (ra, rb) in first_a.readouts.iter().zip(&first_b.readouts) {
            if ra.register() != rb.register() || ra.kind() != rb.kind() {
                return Err(Error::TraceShapeMismatch);
            }
        }
    }
    for (da, db) in dist_a.iter().zip(&dist_b) {
        if da.len() != db.len() {
            return Err(Error::TraceShapeMismatch);
        }
        for (x, y) in da.iter().zip(db) {
            if libm::fabs(x - y) > tolerance {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
