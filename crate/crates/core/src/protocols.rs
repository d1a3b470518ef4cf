//! Measurement and memory-reset protocols.
//!
//! Two experiments are built here. The first is the reversible-measurement
//! test: an observer records the z-component of an x-polarized spin, the
//! record is either unwound by the adjoint unitary or dumped into an
//! environment ancilla, and the spin is then measured in the x basis. The
//! second is the branching cycle of a machine observer that backs up its
//! memory and resets it — either because it learned of an impending disaster
//! (probability `p` per cycle) or pseudo-randomly from a fraction `q` of its
//! disaster-free macrostates — with the erased record swapped into a dump
//! ancilla so the whole cycle stays unitary.

use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::interpret::{
    execute, exact_readout_distributions, Interpretation, ReadoutKind, Schedule, Step,
};
use crate::layout::SpaceLayout;
use crate::observer::{
    collapse_to, decompose, BranchDecomposition, MacrostateRegister, MacrostateRole,
};
use crate::operator::Operator;
use crate::rng::{bernoulli, sample_index};
use crate::state::{Amplitude, StateVector};

/// Observer memory register of the reversible-measurement experiment.
pub const MEMORY: &str = "memory";
/// Spin register (z basis: 0 = up, 1 = down).
pub const SPIN: &str = "spin";
/// Environment ancilla receiving dumped measurement records.
pub const ENVIRONMENT: &str = "environment";

/// Observer macrostate register of the branching-cycle experiment.
pub const OBSERVER: &str = "observer";
/// Latent environment bit: 1 = a disaster is coming.
pub const DISASTER: &str = "disaster";
/// Branch-group tag keeping cycle branches orthogonal in the environment.
pub const WORKSPACE: &str = "workspace";
/// Dump ancilla receiving the erased macrostate record.
pub const DUMP: &str = "dump";

/// Memory values of the reversible-measurement observer.
pub const MEM_UNMEASURED: usize = 0;
pub const MEM_SAW_UP: usize = 1;
pub const MEM_SAW_DOWN: usize = 2;

/// Spin readout value meaning "x-up" after the x-basis rotation.
pub const X_UP: usize = 0;

const WS_IDLE: usize = 0;
const WS_K1: usize = 1;
const WS_K2: usize = 2;
const WS_K3: usize = 3;

/// Largest count of no-disaster cycle macrostates. Bounds the erasure
/// operator at a dense-materializable dimension.
pub const MAX_NO_DISASTER: usize = 41;

/// How the measurement record is disposed of in the Deutsch experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeutschMode {
    /// Unwind the measurement with the adjoint unitary.
    Reversible,
    /// Copy the record into the environment, then blank the memory.
    EnvironmentDump,
}

/// Configuration of the reversible-measurement experiment. The
/// interpretation is supplied at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeutschConfig {
    pub mode: DeutschMode,
}

/// Whether the backup is independent of the latent disaster bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// One shared backup; erasure merges disaster and no-disaster sectors.
    Uncorrelated,
    /// The stored state already differs between sectors, so erasure restores
    /// disaster branches to a distinct macrostate.
    CorrelatedBackup,
}

/// One branch group of the cycle superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchGroup {
    /// Learned of a disaster; will reset.
    K1,
    /// Pseudo-random reset scheduled.
    K2,
    /// No reset.
    K3,
}

impl BranchGroup {
    pub fn label(&self) -> &'static str {
        match self {
            BranchGroup::K1 => "k1",
            BranchGroup::K2 => "k2",
            BranchGroup::K3 => "k3",
        }
    }
}

/// Outcome of one branching-cycle trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleOutcome {
    pub branch_group: BranchGroup,
    pub reset_occurred: bool,
    /// Present exactly when a reset occurred.
    pub disaster_after_reset: Option<bool>,
}

/// Parameters of the branching-cycle experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisasterConfig {
    /// Probability of learning about an impending disaster during the cycle.
    pub p: f64,
    /// Requested pseudo-random reset fraction.
    pub q: f64,
    /// Index of the backup macrostate.
    pub backup_index: usize,
    pub scenario: Scenario,
    /// Total macrostate count; `None` selects the smallest register that
    /// realizes `q` exactly (when `q` has a small denominator).
    pub macrostate_count: Option<usize>,
}

impl DisasterConfig {
    pub fn new(p: f64, q: f64) -> Self {
        DisasterConfig {
            p,
            q,
            backup_index: 0,
            scenario: Scenario::Uncorrelated,
            macrostate_count: None,
        }
    }

    pub fn with_scenario(mut self, scenario: Scenario) -> Self {
        self.scenario = scenario;
        self
    }

    pub fn with_macrostate_count(mut self, count: usize) -> Self {
        self.macrostate_count = Some(count);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidProbability { name: "p", value: self.p });
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::InvalidProbability { name: "q", value: self.q });
        }
        self.no_disaster_count().map(|_| ())
    }

    fn no_disaster_count(&self) -> Result<usize> {
        match self.macrostate_count {
            Some(m) => {
                if m < 5 {
                    Err(Error::MacrostateCountTooSmall { requested: m, minimum: 5 })
                } else if m > MAX_NO_DISASTER + 4 {
                    Err(Error::DimensionTooLarge { dim: m, cap: MAX_NO_DISASTER + 4 })
                } else {
                    Ok(m - 4)
                }
            }
            None => Ok(minimal_no_disaster_count(self.q)),
        }
    }

    /// The macrostate register this configuration induces.
    pub fn macrostate_register(&self) -> Result<MacrostateRegister> {
        MacrostateRegister::for_disaster_protocol(
            self.q,
            self.no_disaster_count()?,
            1,
            self.backup_index,
        )
    }
}

/// Smallest count of no-disaster macrostates realizing `q` exactly, when
/// `q` is a ratio of small integers; otherwise the count (up to the cap)
/// that best approximates `q`.
fn minimal_no_disaster_count(q: f64) -> usize {
    let mut best = 1;
    let mut best_err = f64::INFINITY;
    for d in 1..=MAX_NO_DISASTER {
        let scaled = q * d as f64;
        let err = libm::fabs(scaled - libm::round(scaled));
        if err <= 1e-9 {
            return d;
        }
        let realized_err = libm::fabs(q - libm::round(scaled) / d as f64);
        if realized_err < best_err - 1e-15 {
            best_err = realized_err;
            best = d;
        }
    }
    best
}

/// Probability that the observer resets its memory: `p + (1−p)·q`.
pub fn p_reset_closed_form(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability { name: "p", value: p });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidProbability { name: "q", value: q });
    }
    Ok(p + (1.0 - p) * q)
}

/// Probability that the reset observer learns of a disaster on new
/// observations: `p / (p + (1−p)·q)`. Undefined when no reset can happen.
pub fn p_dis_closed_form(p: f64, q: f64) -> Result<f64> {
    let denominator = p_reset_closed_form(p, q)?;
    if denominator <= 0.0 {
        return Err(Error::UndefinedConditional);
    }
    Ok(p / denominator)
}

/// Completes a partial basis map to a full permutation: unmapped sources are
/// matched to unused targets in increasing order.
fn complete_permutation(dim: usize, partial: &[(usize, usize)]) -> Result<Vec<usize>> {
    let mut perm = alloc::vec![usize::MAX; dim];
    let mut used = alloc::vec![false; dim];
    for &(source, target) in partial {
        if source >= dim || target >= dim || perm[source] != usize::MAX || used[target] {
            return Err(Error::InvalidPermutation);
        }
        perm[source] = target;
        used[target] = true;
    }
    let mut next_free = 0usize;
    for slot in perm.iter_mut() {
        if *slot == usize::MAX {
            while used[next_free] {
                next_free += 1;
            }
            *slot = next_free;
            used[next_free] = true;
        }
    }
    Ok(perm)
}

// ---------------------------------------------------------------------------
// Reversible measurement (Deutsch experiment)
// ---------------------------------------------------------------------------

/// Layout of the reversible-measurement experiment: observer memory first,
/// then the spin and the dump environment.
pub fn deutsch_layout() -> Result<Arc<SpaceLayout>> {
    Ok(Arc::new(SpaceLayout::new([
        (MEMORY, 3usize),
        (SPIN, 2usize),
        (ENVIRONMENT, 3usize),
    ])?))
}

/// `|unmeasured⟩ ⊗ |+x⟩ ⊗ |blank⟩`.
pub fn deutsch_initial_state(layout: &Arc<SpaceLayout>) -> Result<StateVector> {
    let memory = StateVector::basis(
        Arc::new(SpaceLayout::new([(MEMORY, layout.dim(0))])?),
        &[MEM_UNMEASURED],
    )?;
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let spin = StateVector::from_amplitudes(
        Arc::new(SpaceLayout::new([(SPIN, 2usize)])?),
        alloc::vec![Amplitude::new(s, 0.0), Amplitude::new(s, 0.0)],
    )?;
    let environment = StateVector::basis(
        Arc::new(SpaceLayout::new([(ENVIRONMENT, layout.dim(2))])?),
        &[0],
    )?;
    memory.tensor(&spin)?.tensor(&environment)
}

fn validate_deutsch_layout(layout: &SpaceLayout) -> Result<(usize, usize)> {
    let memory_dim = layout.dim(layout.register_index(MEMORY)?);
    let spin_dim = layout.dim(layout.register_index(SPIN)?);
    if memory_dim < 3 {
        return Err(Error::DimensionMismatch { expected: 3, actual: memory_dim });
    }
    if spin_dim != 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: spin_dim });
    }
    Ok((memory_dim, spin_dim))
}

/// Controlled copy of the spin's z value into the observer memory, acting on
/// `(memory, spin)`. The spin is untouched in the z basis; an unmeasured
/// memory records "saw up" or "saw down".
pub fn build_measurement_unitary(layout: &SpaceLayout) -> Result<Operator> {
    let (memory_dim, spin_dim) = validate_deutsch_layout(layout)?;
    let dim = memory_dim * spin_dim;
    let mut partial = Vec::with_capacity(dim);
    for m in 0..memory_dim {
        for s in 0..spin_dim {
            // Per spin value, swap "unmeasured" with the matching record so
            // the map stays a permutation.
            let record = MEM_SAW_UP + s;
            let m_out = if m == MEM_UNMEASURED {
                record
            } else if m == record {
                MEM_UNMEASURED
            } else {
                m
            };
            partial.push((m * spin_dim + s, m_out * spin_dim + s));
        }
    }
    Operator::permutation(&complete_permutation(dim, &partial)?)
}

/// Adjoint of the measurement unitary: disentangles the observer from the
/// spin, making it forget the result.
pub fn build_reversal_unitary(layout: &SpaceLayout) -> Result<Operator> {
    Ok(build_measurement_unitary(layout)?.adjoint())
}

/// Copies the memory record into the environment ancilla and blanks the
/// memory, acting on `(memory, environment)`. Identity on an unmeasured
/// memory with a fresh ancilla.
pub fn build_dump_unitary(layout: &SpaceLayout) -> Result<Operator> {
    let memory_dim = layout.dim(layout.register_index(MEMORY)?);
    let env_dim = layout.dim(layout.register_index(ENVIRONMENT)?);
    if memory_dim < 3 {
        return Err(Error::DimensionMismatch { expected: 3, actual: memory_dim });
    }
    if env_dim < memory_dim {
        return Err(Error::DimensionMismatch { expected: memory_dim, actual: env_dim });
    }
    let dim = memory_dim * env_dim;
    let partial: Vec<(usize, usize)> = (0..memory_dim)
        .map(|m| (m * env_dim, MEM_UNMEASURED * env_dim + m))
        .collect();
    Operator::permutation(&complete_permutation(dim, &partial)?)
}

/// Rotation taking the x basis onto the computational basis, so an x
/// measurement is a z readout; `|+x⟩` maps to readout value [`X_UP`].
pub fn x_basis_unitary() -> Operator {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    Operator::from_entries(
        2,
        alloc::vec![
            Amplitude::new(s, 0.0),
            Amplitude::new(s, 0.0),
            Amplitude::new(s, 0.0),
            Amplitude::new(-s, 0.0),
        ],
    )
    .expect("fixed 2x2 rotation is unitary")
}

/// Outcome of one reversible-measurement trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeutschTrial {
    /// Final x measurement gave x-up.
    pub x_up: bool,
    /// Memory branch the observer found itself in mid-protocol
    /// (`MEM_SAW_UP` or `MEM_SAW_DOWN`).
    pub memory_branch: usize,
}

/// Prebuilt schedule and initial state of the reversible-measurement
/// experiment.
#[derive(Debug, Clone)]
pub struct DeutschExperiment {
    mode: DeutschMode,
    layout: Arc<SpaceLayout>,
    initial: StateVector,
    schedule: Schedule,
}

impl DeutschExperiment {
    pub fn new(config: DeutschConfig) -> Result<Self> {
        let layout = deutsch_layout()?;
        let initial = deutsch_initial_state(&layout)?;
        let measure = build_measurement_unitary(&layout)?;
        let mut steps = alloc::vec![
            Step::Apply {
                op: measure,
                targets: alloc::vec![MEMORY.to_string(), SPIN.to_string()],
            },
            Step::Readout { register: MEMORY.to_string(), kind: ReadoutKind::Intermediate },
        ];
        match config.mode {
            DeutschMode::Reversible => steps.push(Step::Apply {
                op: build_reversal_unitary(&layout)?,
                targets: alloc::vec![MEMORY.to_string(), SPIN.to_string()],
            }),
            DeutschMode::EnvironmentDump => steps.push(Step::Erase {
                op: build_dump_unitary(&layout)?,
                targets: alloc::vec![MEMORY.to_string(), ENVIRONMENT.to_string()],
            }),
        }
        steps.push(Step::Apply {
            op: x_basis_unitary(),
            targets: alloc::vec![SPIN.to_string()],
        });
        steps.push(Step::Readout { register: SPIN.to_string(), kind: ReadoutKind::Terminal });
        Ok(DeutschExperiment {
            mode: config.mode,
            layout,
            initial,
            schedule: Schedule::new(steps),
        })
    }

    pub fn mode(&self) -> DeutschMode {
        self.mode
    }

    pub fn layout(&self) -> &Arc<SpaceLayout> {
        &self.layout
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial
    }

    /// Exact probability of reading x-up at the terminal measurement.
    pub fn p_x_up_exact(&self, interpretation: Interpretation) -> Result<f64> {
        let dists = exact_readout_distributions(&self.schedule, &self.initial, interpretation)?;
        Ok(dists.last().expect("schedule has a terminal readout")[X_UP])
    }

    /// Runs one sampled trial.
    pub fn run_trial(
        &self,
        interpretation: Interpretation,
        rng: &mut impl RngCore,
    ) -> Result<DeutschTrial> {
        let trace = execute(&self.schedule, &self.initial, interpretation, rng)?;
        let memory_branch = match &trace.readouts[0] {
            crate::interpret::ReadoutRecord::Sampled { value, .. } => *value,
            crate::interpret::ReadoutRecord::Weights { probabilities, .. } => {
                // Many-Worlds: the intermediate readout records weights; the
                // single-world narrative samples the branch afterwards.
                sample_index(probabilities, 1.0, rng)
            }
        };
        let x_value = trace
            .readouts
            .last()
            .and_then(|r| r.sampled_value())
            .expect("terminal readout is sampled");
        Ok(DeutschTrial { x_up: x_value == X_UP, memory_branch })
    }
}

/// Exact x-up probability for a mode and interpretation.
pub fn deutsch_p_x_up(config: DeutschConfig, interpretation: Interpretation) -> Result<f64> {
    DeutschExperiment::new(config)?.p_x_up_exact(interpretation)
}

// ---------------------------------------------------------------------------
// Memory-reset branching cycle
// ---------------------------------------------------------------------------

/// Layout of the branching-cycle experiment and the macrostate register that
/// defines the observer dimension.
pub fn disaster_layout(cfg: &DisasterConfig) -> Result<(Arc<SpaceLayout>, MacrostateRegister)> {
    cfg.validate()?;
    let register = cfg.macrostate_register()?;
    let m = register.count();
    let layout = Arc::new(SpaceLayout::new([
        (OBSERVER, m),
        (DISASTER, 2),
        (WORKSPACE, 4),
        (DUMP, m),
    ])?);
    Ok((layout, register))
}

fn cycle_local_index(dis_dim: usize, ws_dim: usize, obs: usize, dis: usize, ws: usize) -> usize {
    (obs * dis_dim + dis) * ws_dim + ws
}

/// The clock-cycle unitary: maps the backed-up observer with no disaster
/// knowledge into the three-group superposition with squared group weights
/// `p`, `(1−p)·q_realized`, and `(1−p)·(1−q_realized)`, uniform within each
/// group. Extended to a full unitary by a Householder reflection.
pub fn build_cycle_unitary(cfg: &DisasterConfig, layout: &SpaceLayout) -> Result<Operator> {
    cfg.validate()?;
    let register = cfg.macrostate_register()?;
    let m = register.count();
    let obs_dim = layout.dim(layout.register_index(OBSERVER)?);
    if obs_dim != m {
        return Err(Error::DimensionMismatch { expected: m, actual: obs_dim });
    }
    let dis_dim = layout.dim(layout.register_index(DISASTER)?);
    let ws_dim = layout.dim(layout.register_index(WORKSPACE)?);
    if dis_dim != 2 || ws_dim != 4 {
        return Err(Error::DimensionMismatch { expected: 8, actual: dis_dim * ws_dim });
    }
    let dim = m * dis_dim * ws_dim;
    let q_realized = register.realized_q();
    let p = cfg.p;

    let groups = [
        (register.indices_of_role(MacrostateRole::Disaster), p, 1, WS_K1),
        (
            register.indices_of_role(MacrostateRole::PseudoReset),
            (1.0 - p) * q_realized,
            0,
            WS_K2,
        ),
        (
            register.indices_of_role(MacrostateRole::NoReset),
            (1.0 - p) * (1.0 - q_realized),
            0,
            WS_K3,
        ),
    ];
    let mut target = alloc::vec![Amplitude::ZERO; dim];
    for (indices, weight, dis, ws) in groups {
        if indices.is_empty() || weight <= 0.0 {
            continue;
        }
        let amp = libm::sqrt(weight / indices.len() as f64);
        for k in indices {
            target[cycle_local_index(dis_dim, ws_dim, k, dis, ws)] = Amplitude::new(amp, 0.0);
        }
    }
    let source = cycle_local_index(dis_dim, ws_dim, cfg.backup_index, 0, WS_IDLE);
    Operator::reflection_to_basis(source, &target)
}

/// The erasure unitary on `(observer, dump)`: each resetting macrostate is
/// swapped into the fresh dump ancilla and the observer is restored —
/// disaster branches to a separate successor in the correlated-backup
/// scenario. Non-resetting macrostates are untouched.
pub fn build_erasure_unitary(cfg: &DisasterConfig, layout: &SpaceLayout) -> Result<Operator> {
    cfg.validate()?;
    let register = cfg.macrostate_register()?;
    let m = register.count();
    let dump_dim = layout.dim(layout.register_index(DUMP)?);
    if dump_dim != m || layout.dim(layout.register_index(OBSERVER)?) != m {
        return Err(Error::DimensionMismatch { expected: m, actual: dump_dim });
    }
    let restored = register
        .index_of_role(MacrostateRole::Restored)
        .expect("register always carries a restored state");
    let restored_disaster = register
        .index_of_role(MacrostateRole::RestoredDisaster)
        .expect("register always carries a restored-disaster state");

    let mut partial = Vec::with_capacity(m);
    for k in 0..m {
        let state = register.macrostate(k);
        let source = k * m; // dump ancilla in its reference state
        if state.reset_scheduled() {
            let successor = if state.knows_disaster() && cfg.scenario == Scenario::CorrelatedBackup
            {
                restored_disaster
            } else {
                restored
            };
            partial.push((source, successor * m + k));
        } else {
            partial.push((source, source));
        }
    }
    Operator::permutation(&complete_permutation(m * m, &partial)?)
}

/// Prebuilt branching-cycle experiment: operators, the exact post-cycle and
/// post-erasure states, and per-branch conditional disaster probabilities.
///
/// The protocol is identical across trials, so the unitary evolution is
/// computed once and each trial only draws Born samples from it.
#[derive(Debug, Clone)]
pub struct DisasterExperiment {
    cfg: DisasterConfig,
    layout: Arc<SpaceLayout>,
    register: MacrostateRegister,
    cycle: Operator,
    erasure: Operator,
    initial: StateVector,
    post_cycle: StateVector,
    decomposition: BranchDecomposition,
    post_erasure: StateVector,
    /// Conditional disaster probability of each macrostate's collapsed
    /// branch after erasure (collapse semantics).
    collapse_disaster: Vec<Option<f64>>,
    /// Conditional disaster probability given each restored successor
    /// (Many-Worlds semantics).
    successor_disaster: Vec<Option<f64>>,
    p_reset_quantum: f64,
    p_dis_quantum: Option<f64>,
}

impl DisasterExperiment {
    pub fn new(cfg: DisasterConfig) -> Result<Self> {
        let (layout, register) = disaster_layout(&cfg)?;
        let cycle = build_cycle_unitary(&cfg, &layout)?;
        let erasure = build_erasure_unitary(&cfg, &layout)?;

        let mut digits = alloc::vec![0usize; 4];
        digits[0] = cfg.backup_index;
        let initial = StateVector::basis(Arc::clone(&layout), &digits)?;
        let post_cycle = cycle.apply_on(&initial, &[OBSERVER, DISASTER, WORKSPACE])?;
        let decomposition = decompose(&post_cycle)?;
        let post_erasure = erasure.apply_on(&post_cycle, &[OBSERVER, DUMP])?;

        let m = register.count();
        let disaster_reg = layout.register_index(DISASTER)?;

        // Exact branch-weight values.
        let mut p_reset_quantum = 0.0;
        for branch in decomposition.branches() {
            if register.macrostate(branch.macrostate_index).reset_scheduled() {
                p_reset_quantum += branch.weight;
            }
        }

        // Joint (observer, disaster) weights of the post-erasure state.
        let mut joint = alloc::vec![[0.0f64; 2]; m];
        for (index, amp) in post_erasure.amplitudes().iter().enumerate() {
            let obs = post_erasure.layout().digit_at(index, 0);
            let dis = post_erasure.layout().digit_at(index, disaster_reg);
            joint[obs][dis] += amp.norm_sqr();
        }
        let mut successor_disaster = alloc::vec![None; m];
        let mut successor_total = 0.0;
        let mut successor_hit = 0.0;
        for k in 0..m {
            let role = register.macrostate(k).role();
            if matches!(role, MacrostateRole::Restored | MacrostateRole::RestoredDisaster) {
                let total = joint[k][0] + joint[k][1];
                if total > crate::observer::BRANCH_PRUNE_TOL {
                    successor_disaster[k] = Some(joint[k][1] / total);
                    successor_total += total;
                    successor_hit += joint[k][1];
                }
            }
        }
        let p_dis_quantum = if successor_total > crate::observer::BRANCH_PRUNE_TOL {
            Some(successor_hit / successor_total)
        } else {
            None
        };

        // Collapse semantics: per-branch post-erasure disaster probability.
        let mut collapse_disaster = alloc::vec![None; m];
        for branch in decomposition.branches() {
            let k = branch.macrostate_index;
            if !register.macrostate(k).reset_scheduled() {
                continue;
            }
            let collapsed = collapse_to(&post_cycle, k)?;
            let erased = erasure.apply_on(&collapsed, &[OBSERVER, DUMP])?;
            collapse_disaster[k] = Some(erased.register_weights(disaster_reg)[1]);
        }

        Ok(DisasterExperiment {
            cfg,
            layout,
            register,
            cycle,
            erasure,
            initial,
            post_cycle,
            decomposition,
            post_erasure,
            collapse_disaster,
            successor_disaster,
            p_reset_quantum,
            p_dis_quantum,
        })
    }

    pub fn config(&self) -> &DisasterConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &Arc<SpaceLayout> {
        &self.layout
    }

    pub fn register(&self) -> &MacrostateRegister {
        &self.register
    }

    pub fn cycle_unitary(&self) -> &Operator {
        &self.cycle
    }

    pub fn erasure_unitary(&self) -> &Operator {
        &self.erasure
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial
    }

    pub fn post_cycle_state(&self) -> &StateVector {
        &self.post_cycle
    }

    pub fn post_erasure_state(&self) -> &StateVector {
        &self.post_erasure
    }

    pub fn decomposition(&self) -> &BranchDecomposition {
        &self.decomposition
    }

    pub fn realized_q(&self) -> f64 {
        self.register.realized_q()
    }

    /// Exact reset probability from branch weights of the cycle state.
    pub fn p_reset_quantum(&self) -> f64 {
        self.p_reset_quantum
    }

    /// Exact post-reset disaster probability from the post-erasure state's
    /// disaster-register weights within the restored branches.
    pub fn p_dis_quantum(&self) -> Result<f64> {
        self.p_dis_quantum.ok_or(Error::UndefinedConditional)
    }

    /// Summed branch weights of the three cycle groups.
    pub fn group_weights(&self) -> (f64, f64, f64) {
        let mut weights = (0.0, 0.0, 0.0);
        for branch in self.decomposition.branches() {
            match self.group_of(branch.macrostate_index) {
                Some(BranchGroup::K1) => weights.0 += branch.weight,
                Some(BranchGroup::K2) => weights.1 += branch.weight,
                Some(BranchGroup::K3) => weights.2 += branch.weight,
                None => {}
            }
        }
        weights
    }

    pub fn group_of(&self, macrostate_index: usize) -> Option<BranchGroup> {
        match self.register.macrostate(macrostate_index).role() {
            MacrostateRole::Disaster => Some(BranchGroup::K1),
            MacrostateRole::PseudoReset => Some(BranchGroup::K2),
            MacrostateRole::NoReset => Some(BranchGroup::K3),
            _ => None,
        }
    }

    /// Conditional probability of finding the disaster after reset, given
    /// the pre-erasure branch, under either interpretation.
    pub fn disaster_prob_given_branch(
        &self,
        macrostate_index: usize,
        interpretation: Interpretation,
    ) -> Result<f64> {
        let state = self.register.macrostate(macrostate_index);
        if !state.reset_scheduled() {
            return Err(Error::EmptyBranch { macrostate: macrostate_index });
        }
        match interpretation {
            Interpretation::Collapse => self.collapse_disaster[macrostate_index]
                .ok_or(Error::EmptyBranch { macrostate: macrostate_index }),
            Interpretation::ManyWorlds => {
                let successor = self.successor_of(macrostate_index);
                self.successor_disaster[successor]
                    .ok_or(Error::EmptyBranch { macrostate: successor })
            }
        }
    }

    fn successor_of(&self, macrostate_index: usize) -> usize {
        let state = self.register.macrostate(macrostate_index);
        if state.knows_disaster() && self.cfg.scenario == Scenario::CorrelatedBackup {
            self.register
                .index_of_role(MacrostateRole::RestoredDisaster)
                .expect("restored-disaster state exists")
        } else {
            self.register
                .index_of_role(MacrostateRole::Restored)
                .expect("restored state exists")
        }
    }

    /// Runs one sampled trial: Born-sample the cycle branch, then — if that
    /// branch resets — sample the post-reset disaster observation.
    ///
    /// Under collapse the disaster outcome is conditioned on the collapsed
    /// pre-erasure branch; under Many-Worlds it is conditioned only on the
    /// observer's post-erasure macrostate, because the erased record no
    /// longer singles out a sector.
    pub fn run_trial(
        &self,
        interpretation: Interpretation,
        rng: &mut impl RngCore,
    ) -> Result<CycleOutcome> {
        let k = self.decomposition.sample_macrostate(rng)?;
        let branch_group = self
            .group_of(k)
            .expect("cycle state has support only on cycle macrostates");
        if branch_group == BranchGroup::K3 {
            return Ok(CycleOutcome {
                branch_group,
                reset_occurred: false,
                disaster_after_reset: None,
            });
        }
        let p_disaster = self.disaster_prob_given_branch(k, interpretation)?;
        Ok(CycleOutcome {
            branch_group,
            reset_occurred: true,
            disaster_after_reset: Some(bernoulli(rng, p_disaster)),
        })
    }

    /// The full cycle as an executable schedule (used for cross-checking the
    /// sampled fast path against `execute`).
    pub fn schedule(&self) -> Schedule {
        Schedule::new(alloc::vec![
            Step::Apply {
                op: self.cycle.clone(),
                targets: alloc::vec![
                    OBSERVER.to_string(),
                    DISASTER.to_string(),
                    WORKSPACE.to_string(),
                ],
            },
            Step::Readout { register: OBSERVER.to_string(), kind: ReadoutKind::Intermediate },
            Step::Erase {
                op: self.erasure.clone(),
                targets: alloc::vec![OBSERVER.to_string(), DUMP.to_string()],
            },
            Step::Readout { register: OBSERVER.to_string(), kind: ReadoutKind::Intermediate },
            Step::Readout { register: DISASTER.to_string(), kind: ReadoutKind::Terminal },
        ])
    }
}

/// Builds the experiment for `cfg` and runs a single trial.
pub fn run_disaster_cycle(
    cfg: &DisasterConfig,
    interpretation: Interpretation,
    rng: &mut impl RngCore,
) -> Result<CycleOutcome> {
    DisasterExperiment::new(*cfg)?.run_trial(interpretation, rng)
}
