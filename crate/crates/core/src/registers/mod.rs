//! Qubit register layout, state types, partial traces, and the two-qubit
//! conjugation kernel.
//!
//! Bit convention: qubit `q` of an `N`-qubit register lives at bit `N − 1 − q`
//! of the basis index. System qubits come first, so they occupy the most
//! significant bits; environment qubit 0 sits next to the system and the last
//! environment qubit is least significant.

mod kernel;
mod state;

use std::fmt;

pub use kernel::apply_two_qubit;
pub(crate) use kernel::{conjugate_into, gate4_from_matrix, Gate4};
pub use state::{
    initial_state, partial_trace, tensor, trace_distance, DensityMatrix, InitialFamily, InitialParams, PureState,
};

use crate::numerics::NumericsError;

/// Largest register size accepted by default (`d = 4096`).
pub const DEFAULT_MAX_QUBITS: usize = 12;

pub const STATE_HERMITIAN_TOL: f64 = 1e-10;
pub const STATE_TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;
pub const AMPLITUDE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegisterError {
    #[error("invalid layout k={k}, n={n}: need k >= 1, n >= 1 and k + n <= {max}")]
    InvalidLayout { k: usize, n: usize, max: usize },
    #[error("register of {qubits} qubits exceeds the maximum of {max}")]
    SizeOverflow { qubits: usize, max: usize },
    #[error("unknown initial-state family `{0}`")]
    UnknownFamily(String),
    #[error("bad amplitudes: {0}")]
    BadAmplitudes(String),
    #[error("qubit index {index} out of range for a {qubits}-qubit register")]
    IndexOutOfRange { index: usize, qubits: usize },
    #[error("qubit index {0} listed twice")]
    DuplicateIndex(usize),
    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    SameQubit(usize),
    #[error("gate is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("register layouts differ")]
    LayoutMismatch,
    #[error("not a density matrix: {0}")]
    NotAState(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Role of one qubit in the register. Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum QubitLabel {
    System(usize),
    Env(usize),
}

impl fmt::Display for QubitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitLabel::System(i) => write!(f, "S{}", i + 1),
            QubitLabel::Env(j) => write!(f, "E{}", j + 1),
        }
    }
}

/// `k` system qubits followed by `n` environment qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RegisterLayout {
    k: usize,
    n: usize,
}

impl RegisterLayout {
    pub fn new(k: usize, n: usize) -> Result<Self, RegisterError> {
        Self::with_max(k, n, DEFAULT_MAX_QUBITS)
    }

    pub fn with_max(k: usize, n: usize, max: usize) -> Result<Self, RegisterError> {
        if k == 0 || n == 0 || k + n > max {
            return Err(RegisterError::InvalidLayout { k, n, max });
        }
        Ok(Self { k, n })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_qubits(&self) -> usize {
        self.k + self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits()
    }

    /// Register position of system qubit `i`.
    pub fn system(&self, i: usize) -> usize {
        debug_assert!(i < self.k);
        i
    }

    /// Register position of environment qubit `j`.
    pub fn env(&self, j: usize) -> usize {
        debug_assert!(j < self.n);
        self.k + j
    }

    pub fn labels(&self) -> Vec<QubitLabel> {
        (0..self.k)
            .map(QubitLabel::System)
            .chain((0..self.n).map(QubitLabel::Env))
            .collect()
    }
}

/// Bit position of register qubit `q` in an `nq`-qubit basis index.
#[inline]
pub(crate) fn bit_of(q: usize, nq: usize) -> usize {
    nq - 1 - q
}
