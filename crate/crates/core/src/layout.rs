//! Register layouts over tensor-product spaces.
//!
//! A [`SpaceLayout`] is an ordered list of named registers. Global basis
//! indices are row-major over the register order, so the first register is
//! the most significant digit and its basis blocks are contiguous. By
//! convention the observer macrostate register comes first, followed by
//! environment registers in allocation order.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest dense state-vector dimension the simulator accepts.
pub const MAX_TOTAL_DIM: usize = 1 << 20;

/// One named register in a layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    name: String,
    dim: usize,
}

impl Register {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Ordered register list with row-major index arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceLayout {
    registers: Vec<Register>,
    strides: Vec<usize>,
    total_dim: usize,
}

impl SpaceLayout {
    /// Builds a layout from `(name, dim)` pairs.
    ///
    /// Rejects empty register lists, duplicate names, dims below 2, and
    /// total dimensions above [`MAX_TOTAL_DIM`].
    pub fn new<N: Into<String>>(registers: impl IntoIterator<Item = (N, usize)>) -> Result<Self> {
        let registers: Vec<Register> = registers
            .into_iter()
            .map(|(name, dim)| Register { name: name.into(), dim })
            .collect();
        if registers.is_empty() {
            return Err(Error::InvalidLayout("no registers".to_string()));
        }
        for (i, reg) in registers.iter().enumerate() {
            if reg.dim < 2 {
                return Err(Error::InvalidLayout(reg.name.clone() + " has dim < 2"));
            }
            if registers[..i].iter().any(|r| r.name == reg.name) {
                return Err(Error::InvalidLayout(reg.name.clone() + " is duplicated"));
            }
        }
        let mut total_dim = 1usize;
        for reg in &registers {
            total_dim = total_dim
                .checked_mul(reg.dim)
                .filter(|&d| d <= MAX_TOTAL_DIM)
                .ok_or(Error::DimensionTooLarge { dim: usize::MAX, cap: MAX_TOTAL_DIM })?;
        }
        // Row-major: stride of register r is the product of the dims after it.
        let mut strides = alloc::vec![1usize; registers.len()];
        for r in (0..registers.len().saturating_sub(1)).rev() {
            strides[r] = strides[r + 1] * registers[r + 1].dim;
        }
        Ok(SpaceLayout { registers, strides, total_dim })
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn register_count(&self) -> usize {
        self.registers.len()
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register_index(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn dim(&self, register: usize) -> usize {
        self.registers[register].dim
    }

    pub fn stride(&self, register: usize) -> usize {
        self.strides[register]
    }

    /// Global index of a per-register digit tuple.
    pub fn index_of(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.registers.len());
        digits
            .iter()
            .zip(&self.strides)
            .map(|(&d, &s)| d * s)
            .sum()
    }

    /// Per-register digit tuple of a global index.
    pub fn digits_of(&self, index: usize) -> Vec<usize> {
        debug_assert!(index < self.total_dim);
        self.registers
            .iter()
            .zip(&self.strides)
            .map(|(reg, &s)| (index / s) % reg.dim)
            .collect()
    }

    /// Digit of a single register within a global index.
    pub fn digit_at(&self, index: usize, register: usize) -> usize {
        (index / self.strides[register]) % self.registers[register].dim
    }

    /// Layout of `self` followed by the registers of `other`.
    pub fn concat(&self, other: &SpaceLayout) -> Result<SpaceLayout> {
        SpaceLayout::new(
            self.registers
                .iter()
                .chain(other.registers.iter())
                .map(|r| (r.name.clone(), r.dim)),
        )
    }
}
