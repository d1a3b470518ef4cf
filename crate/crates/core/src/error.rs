//! Error type shared by all simulator modules.

use alloc::string::String;
use core::fmt;

/// Errors produced by state, operator, and protocol construction or evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Vector or operator dimensions do not line up.
    DimensionMismatch { expected: usize, actual: usize },
    /// A Hilbert-space dimension exceeds the supported dense cap.
    DimensionTooLarge { dim: usize, cap: usize },
    /// An amplitude or matrix entry is NaN or infinite.
    NonFinite,
    /// An operator failed the unitarity acceptance check.
    NonUnitary { max_deviation: f64 },
    /// A register name is not present in the layout.
    UnknownRegister(String),
    /// Layout construction rejected the register list.
    InvalidLayout(String),
    /// Attempt to normalize or sample from a zero vector.
    ZeroNorm,
    /// Born weights requested from a decomposition with zero total weight.
    ZeroTotalWeight,
    /// Projection onto a macrostate branch that carries no weight.
    EmptyBranch { macrostate: usize },
    /// A probability parameter is outside [0, 1].
    InvalidProbability { name: &'static str, value: f64 },
    /// The macrostate register cannot realize the requested partition.
    MacrostateCountTooSmall { requested: usize, minimum: usize },
    /// An erasure or dump ancilla is not in its reference basis state.
    AncillaNotFresh { register: String },
    /// Conditional probability with an empty conditioning event (p = 0 and q = 0).
    UndefinedConditional,
    /// Readout trace sets have different shapes and cannot be compared.
    TraceShapeMismatch,
    /// A permutation table is not a bijection.
    InvalidPermutation,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            Error::DimensionTooLarge { dim, cap } => {
                write!(f, "dimension {dim} exceeds the dense cap {cap}")
            }
            Error::NonFinite => write!(f, "non-finite amplitude or matrix entry"),
            Error::NonUnitary { max_deviation } => {
                write!(f, "operator is not unitary (max |U\u{2020}U - I| = {max_deviation:e})")
            }
            Error::UnknownRegister(name) => write!(f, "unknown register '{name}'"),
            Error::InvalidLayout(msg) => write!(f, "invalid layout: {msg}"),
            Error::ZeroNorm => write!(f, "cannot normalize a zero vector (empty branch)"),
            Error::ZeroTotalWeight => write!(f, "branch decomposition has zero total weight"),
            Error::EmptyBranch { macrostate } => {
                write!(f, "macrostate {macrostate} carries no weight")
            }
            Error::InvalidProbability { name, value } => {
                write!(f, "{name} = {value} is outside [0, 1]")
            }
            Error::MacrostateCountTooSmall { requested, minimum } => {
                write!(f, "macrostate count {requested} is below the minimum {minimum}")
            }
            Error::AncillaNotFresh { register } => {
                write!(f, "ancilla register '{register}' is not in its reference state")
            }
            Error::UndefinedConditional => {
                write!(f, "conditional probability undefined: no reset ever happens")
            }
            Error::TraceShapeMismatch => write!(f, "execution traces have different shapes"),
            Error::InvalidPermutation => write!(f, "permutation table is not a bijection"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
