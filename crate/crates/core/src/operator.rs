//! Dense operators, unitarity checks, and register-local application.
//!
//! Operators are validated at construction so `apply` stays cheap. Three
//! constructors cover the artifact's needs: general dense matrices (full
//! unitarity check), basis permutations (bijection check only), and
//! Householder reflections mapping a basis state onto a prepared target
//! superposition.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::layout::SpaceLayout;
use crate::state::{Amplitude, StateVector};

/// Maximum max-norm deviation of `U†U` from the identity.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Largest dimension for which dense operators may be materialized.
pub const MAX_OPERATOR_DIM: usize = 1 << 12;

/// Largest dimension for which the O(dim³) unitarity check runs.
pub const MAX_CHECKED_DIM: usize = 1 << 11;

/// Dense `dim × dim` operator in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<Amplitude>,
}

impl Operator {
    /// Builds an operator from row-major entries, enforcing finiteness and
    /// the unitarity acceptance check.
    pub fn from_entries(dim: usize, entries: Vec<Amplitude>) -> Result<Self> {
        if dim > MAX_CHECKED_DIM {
            return Err(Error::DimensionTooLarge { dim, cap: MAX_CHECKED_DIM });
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, actual: entries.len() });
        }
        if entries.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let op = Operator { dim, entries };
        let deviation = op.max_unitarity_deviation();
        if deviation > UNITARITY_TOL {
            return Err(Error::NonUnitary { max_deviation: deviation });
        }
        Ok(op)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim > MAX_OPERATOR_DIM {
            return Err(Error::DimensionTooLarge { dim, cap: MAX_OPERATOR_DIM });
        }
        let mut entries = alloc::vec![Amplitude::ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Amplitude::ONE;
        }
        Ok(Operator { dim, entries })
    }

    /// Basis permutation sending `|i⟩` to `|perm[i]⟩`.
    ///
    /// Permutation matrices are unitary by construction, so only the
    /// bijection property is checked.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let dim = perm.len();
        if dim > MAX_OPERATOR_DIM {
            return Err(Error::DimensionTooLarge { dim, cap: MAX_OPERATOR_DIM });
        }
        let mut seen = alloc::vec![false; dim];
        for &target in perm {
            if target >= dim || seen[target] {
                return Err(Error::InvalidPermutation);
            }
            seen[target] = true;
        }
        let mut entries = alloc::vec![Amplitude::ZERO; dim * dim];
        for (source, &target) in perm.iter().enumerate() {
            entries[target * dim + source] = Amplitude::ONE;
        }
        Ok(Operator { dim, entries })
    }

    /// Householder reflection exchanging the basis state `|source⟩` with the
    /// unit vector `target`, which must be orthogonal to `|source⟩`.
    ///
    /// With `w = |source⟩ − |target⟩` the reflection `I − w w†` maps
    /// `|source⟩ ↦ |target⟩` and fixes the orthogonal complement of `w`.
    pub fn reflection_to_basis(source: usize, target: &[Amplitude]) -> Result<Self> {
        let dim = target.len();
        if source >= dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: source });
        }
        let norm_sqr: f64 = target.iter().map(|a| a.norm_sqr()).sum();
        if libm::fabs(norm_sqr - 1.0) > 1e-12 {
            return Err(Error::NonUnitary { max_deviation: libm::fabs(norm_sqr - 1.0) });
        }
        if target[source].norm_sqr() > 1e-24 {
            return Err(Error::InvalidLayout(
                "reflection target must be orthogonal to the source basis state".to_string(),
            ));
        }
        let mut w: Vec<Amplitude> = target.iter().map(|a| -a).collect();
        w[source] += Amplitude::ONE;
        let mut entries = alloc::vec![Amplitude::ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut e = -w[i] * w[j].conj();
                if i == j {
                    e += Amplitude::ONE;
                }
                entries[i * dim + j] = e;
            }
        }
        Operator::from_entries(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Amplitude] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim + col]
    }

    /// Max-norm of `U†U − I`.
    pub fn max_unitarity_deviation(&self) -> f64 {
        let dim = self.dim;
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Amplitude::ZERO;
                for k in 0..dim {
                    acc += self.entries[k * dim + i].conj() * self.entries[k * dim + j];
                }
                if i == j {
                    acc -= Amplitude::ONE;
                }
                let dev = libm::sqrt(acc.norm_sqr());
                if dev > worst {
                    worst = dev;
                }
            }
        }
        worst
    }

    /// Conjugate transpose. The adjoint of a unitary is unitary, so no
    /// re-validation is performed.
    pub fn adjoint(&self) -> Operator {
        let dim = self.dim;
        let mut entries = alloc::vec![Amplitude::ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                entries[j * dim + i] = self.entries[i * dim + j].conj();
            }
        }
        Operator { dim, entries }
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: other.dim });
        }
        let dim = self.dim;
        let mut entries = alloc::vec![Amplitude::ZERO; dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                let a = self.entries[i * dim + k];
                if a == Amplitude::ZERO {
                    continue;
                }
                for j in 0..dim {
                    entries[i * dim + j] += a * other.entries[k * dim + j];
                }
            }
        }
        Ok(Operator { dim, entries })
    }

    /// Applies this operator to a full-space state.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if self.dim != psi.layout().total_dim() {
            return Err(Error::DimensionMismatch {
                expected: psi.layout().total_dim(),
                actual: self.dim,
            });
        }
        let amps = psi.amplitudes();
        let mut out = alloc::vec![Amplitude::ZERO; self.dim];
        for (i, row) in self.entries.chunks_exact(self.dim).enumerate() {
            let mut acc = Amplitude::ZERO;
            for (a, x) in row.iter().zip(amps) {
                acc += a * x;
            }
            out[i] = acc;
        }
        StateVector::from_amplitudes(psi.layout_arc().clone(), out)
    }

    /// Lifts this operator to the full space of `layout`, acting on
    /// `targets` (in the given order) and as identity elsewhere.
    pub fn embed(&self, targets: &[&str], layout: &SpaceLayout) -> Result<Operator> {
        let total = layout.total_dim();
        if total > MAX_OPERATOR_DIM {
            return Err(Error::DimensionTooLarge { dim: total, cap: MAX_OPERATOR_DIM });
        }
        let plan = EmbeddingPlan::new(self.dim, targets, layout)?;
        let mut entries = alloc::vec![Amplitude::ZERO; total * total];
        for &rest in &plan.rest_offsets {
            for (l_out, &off_out) in plan.local_offsets.iter().enumerate() {
                let row = (rest + off_out) * total + rest;
                for (l_in, &off_in) in plan.local_offsets.iter().enumerate() {
                    entries[row + off_in] = self.entries[l_out * self.dim + l_in];
                }
            }
        }
        Ok(Operator { dim: total, entries })
    }

    /// Applies this operator to `targets` of `psi` without materializing the
    /// embedded matrix. Equivalent to `self.embed(targets, ..)?.apply(psi)`.
    pub fn apply_on(&self, psi: &StateVector, targets: &[&str]) -> Result<StateVector> {
        let plan = EmbeddingPlan::new(self.dim, targets, psi.layout())?;
        let amps = psi.amplitudes();
        let mut out = amps.to_vec();
        let mut scratch = alloc::vec![Amplitude::ZERO; self.dim];
        for &rest in &plan.rest_offsets {
            for (l, &off) in plan.local_offsets.iter().enumerate() {
                scratch[l] = amps[rest + off];
            }
            for (l_out, &off_out) in plan.local_offsets.iter().enumerate() {
                let row = &self.entries[l_out * self.dim..(l_out + 1) * self.dim];
                let mut acc = Amplitude::ZERO;
                for (a, x) in row.iter().zip(scratch.iter()) {
                    acc += a * x;
                }
                out[rest + off_out] = acc;
            }
        }
        StateVector::from_amplitudes(psi.layout_arc().clone(), out)
    }
}

/// Index arithmetic shared by `embed` and `apply_on`: global offsets of the
/// target-register digits and of every assignment of the remaining digits.
struct EmbeddingPlan {
    local_offsets: Vec<usize>,
    rest_offsets: Vec<usize>,
}

impl EmbeddingPlan {
    fn new(op_dim: usize, targets: &[&str], layout: &SpaceLayout) -> Result<Self> {
        let mut target_regs = Vec::with_capacity(targets.len());
        for name in targets {
            let reg = layout.register_index(name)?;
            if target_regs.contains(&reg) {
                return Err(Error::InvalidLayout("duplicate target register".to_string()));
            }
            target_regs.push(reg);
        }
        let local_dim: usize = target_regs.iter().map(|&r| layout.dim(r)).product();
        if local_dim != op_dim {
            return Err(Error::DimensionMismatch { expected: local_dim, actual: op_dim });
        }

        // Local index is row-major over the targets in the order given.
        let mut local_offsets = alloc::vec![0usize; local_dim];
        for (l, offset) in local_offsets.iter_mut().enumerate() {
            let mut rem = l;
            for &reg in target_regs.iter().rev() {
                *offset += (rem % layout.dim(reg)) * layout.stride(reg);
                rem /= layout.dim(reg);
            }
        }

        let rest_regs: Vec<usize> = (0..layout.register_count())
            .filter(|r| !target_regs.contains(r))
            .collect();
        let rest_count: usize = rest_regs.iter().map(|&r| layout.dim(r)).product();
        let mut rest_offsets = alloc::vec![0usize; rest_count];
        for (r, offset) in rest_offsets.iter_mut().enumerate() {
            let mut rem = r;
            for &reg in rest_regs.iter().rev() {
                *offset += (rem % layout.dim(reg)) * layout.stride(reg);
                rem /= layout.dim(reg);
            }
        }
        Ok(EmbeddingPlan { local_offsets, rest_offsets })
    }
}
