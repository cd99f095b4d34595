//! Decoders for the factory's single round of transversal readout.
//!
//! [`MleSolver`] finds the most likely error consistent with a syndrome
//! exactly (branch and bound), optionally pinned to a logical class, which
//! gives the logical gap. [`MldTable`] is the sampled lookup alternative.
//! [`FactoryDecoder`] runs the two stages (ancilla blocks first, then every
//! block) and [`sliding_scale`] turns per-shot confidence into curves.

mod mld;
mod mle;
mod scale;
mod stage;

pub use mld::{build_mld, MldTable};
pub use mle::{Method, MleSolver, Solution};
pub use scale::{by_fraction, by_threshold, perfect_point, ranking, ScalePoint};
pub use stage::{write_csv, DecodeResult, DecoderKind, FactoryDecoder, ShotDecode, Stage};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("{0} detector and logical rows exceed the 128 supported")]
    TooManyRows(usize),
    #[error("lookup tables support at most 24 detectors, got {0}")]
    TooManyDetectors(usize),
    #[error("syndrome {0:#x} cannot be produced by any combination of mechanisms")]
    Infeasible(u128),
    #[error("lookup decoder was not built")]
    NoTable,
}

pub type Result<T> = std::result::Result<T, DecodeError>;
