//! Data codes for the factory: the d=3 and d=5 triangular color codes, a
//! trivial one-qubit "code" for unencoded runs, and the [[5,1,3]] perfect
//! code used as the distillation code.

mod css;
pub mod gf2;
mod perfect;
mod text;

pub use css::{color_code, support, measurement_spec, trivial_code, validate_code, CodeReport, CssCode, MeasurementSpec};
pub use perfect::{perfect_code_513, StabilizerCode};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodeError {
    #[error("unsupported color-code distance {0} (expected 3 or 5)")]
    UnsupportedDistance(usize),
    #[error("codes are limited to 64 qubits, got {0}")]
    TooLarge(usize),
    #[error("X check {x} and Z check {z} anticommute")]
    CssViolation { x: usize, z: usize },
    #[error("logical pair {0} does not anticommute")]
    LogicalPairing(usize),
    #[error("logical {kind}{index} anticommutes with a check")]
    LogicalNotCentral { kind: char, index: usize },
    #[error("logical {kind}{index} lies in the stabilizer group")]
    LogicalTrivial { kind: char, index: usize },
    #[error("k = {claimed} but n − rank(Hx) − rank(Hz) = {actual}")]
    RankMismatch { claimed: usize, actual: usize },
    #[error("claimed distance {claimed}, brute force finds {actual}")]
    DistanceMismatch { claimed: usize, actual: usize },
    #[error("Y-basis readout needs a self-dual code")]
    NotSelfDual,
    #[error("check support uses qubit {qubit} outside 0..{n}")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
