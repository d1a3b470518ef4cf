//! Dense state vectors over a register layout.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::layout::SpaceLayout;

/// Complex amplitude with double-precision real and imaginary parts.
pub type Amplitude = Complex64;

/// Squared-norm agreement required of normalized states.
pub const NORM_TOL: f64 = 1e-12;

/// Dense complex amplitude vector over a [`SpaceLayout`].
///
/// Immutable after construction; all operations return new vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: Arc<SpaceLayout>,
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// Wraps an amplitude vector, checking length and finiteness.
    pub fn from_amplitudes(layout: Arc<SpaceLayout>, amps: Vec<Amplitude>) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                actual: amps.len(),
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(StateVector { layout, amps })
    }

    /// Basis state with digit `digits[r]` in register `r`.
    pub fn basis(layout: Arc<SpaceLayout>, digits: &[usize]) -> Result<Self> {
        if digits.len() != layout.register_count() {
            return Err(Error::DimensionMismatch {
                expected: layout.register_count(),
                actual: digits.len(),
            });
        }
        for (r, &d) in digits.iter().enumerate() {
            if d >= layout.dim(r) {
                return Err(Error::DimensionMismatch { expected: layout.dim(r), actual: d });
            }
        }
        let mut amps = alloc::vec![Amplitude::ZERO; layout.total_dim()];
        amps[layout.index_of(digits)] = Amplitude::ONE;
        Ok(StateVector { layout, amps })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn layout_arc(&self) -> &Arc<SpaceLayout> {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    /// Squared norm, summed in index order so results are reproducible.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    /// Returns the unit-norm rescaling of this vector.
    ///
    /// A zero vector is rejected: it signals a projection onto an empty
    /// branch somewhere upstream.
    pub fn normalize(&self) -> Result<StateVector> {
        let norm_sqr = self.norm_sqr();
        if norm_sqr <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let scale = 1.0 / libm::sqrt(norm_sqr);
        let amps = self.amps.iter().map(|a| a * scale).collect();
        Ok(StateVector { layout: Arc::clone(&self.layout), amps })
    }

    /// Hermitian inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Amplitude> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amps.len(),
                actual: other.amps.len(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Tensor product; the result layout is the concatenation of layouts.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let layout = Arc::new(self.layout.concat(&other.layout)?);
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { layout, amps })
    }

    /// Marginal squared-norm weights of one register's basis values.
    pub fn register_weights(&self, register: usize) -> Vec<f64> {
        let dim = self.layout.dim(register);
        let mut weights = alloc::vec![0.0; dim];
        for (index, amp) in self.amps.iter().enumerate() {
            weights[self.layout.digit_at(index, register)] += amp.norm_sqr();
        }
        weights
    }

    /// Unnormalized projection onto `register == value`.
    pub fn project_register(&self, register: usize, value: usize) -> StateVector {
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(index, amp)| {
                if self.layout.digit_at(index, register) == value {
                    *amp
                } else {
                    Amplitude::ZERO
                }
            })
            .collect();
        StateVector { layout: Arc::clone(&self.layout), amps }
    }

    /// True when all weight sits on the register's reference value 0.
    pub fn register_in_reference(&self, register: usize) -> bool {
        let weights = self.register_weights(register);
        let rest: f64 = weights[1..].iter().sum();
        rest <= NORM_TOL * (weights[0] + rest).max(1.0)
    }
}
