//! Pauli algebra and the two simulators everything else is checked against.
//!
//! Stabilizer work goes through [`StabilizerTableau`]; anything with a
//! non-Clifford input (magic preparation, input `Rz` rotations) goes through
//! the dense [`DenseState`] simulator, which is capped at 12 qubits.

pub mod bloch;
pub mod circuit;
pub mod dense;
pub mod gate;
pub mod pauli;
pub mod tableau;

pub use bloch::BlochVector;
pub use circuit::{Circuit, Layer, LayerTag, Op, QubitRole};
pub use dense::{bloch_of, dense_run, DenseRun, DenseState};
pub use gate::{Basis, Gate};
pub use pauli::{Pauli, PauliString};
pub use tableau::{tableau_run, Expectation, Outcome, StabilizerTableau, TableauRun};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: {left} vs {right} qubits")]
    LengthMismatch { left: usize, right: usize },
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("gate {0} is not Clifford")]
    NonClifford(String),
    #[error("{n} qubits exceeds the dense simulator cap of {max}")]
    TooManyQubits { n: usize, max: usize },
    #[error("gate {gate} expects {expected} targets, got {got}")]
    Arity { gate: String, expected: usize, got: usize },
    #[error("qubit {qubit} used twice in layer {layer}")]
    DuplicateQubit { qubit: usize, layer: usize },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("bloch vector norm {0} exceeds 1")]
    BlochNorm(f64),
    #[error("state is not normalised (norm² = {0})")]
    NotNormalised(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
