//! Input-decoupled noise learning for the distillation factory.
//!
//! The noisy encoded circuit is sampled with deterministic Clifford inputs
//! and decoded, which yields a classical channel on the five logical
//! outcome bits ([`LogicalChannel`]). The non-Clifford part, five magic
//! states through the unencoded distillation circuit, is simulated exactly
//! on five qubits ([`IdealChannel`]). [`compose`] puts the two together;
//! [`bayes`] turns outcome counts into fidelity intervals.

pub mod bayes;
mod compose;
mod ideal;
mod injection;
mod learn;

pub use bayes::{bayes_interval, magic_fidelity, posterior, tomography_estimate, BasisCounts, Interval, Posterior};
pub use compose::{compose, compose_basis, BasisOutcome, Composed};
pub use ideal::{
    ideal_channel, ideal_state, input_fidelity, outcome_distribution, reference_offset, reference_state_prep, IdealBasis,
    IdealChannel,
};
pub use injection::{flipped_component, learn_injection, InjectionStats};
pub use learn::{learn_channel, learn_factory, BasisChannel, Cut, LearnOptions, LogicalChannel, Stratum};

use msd_pauli::Basis;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("channel learned in the {channel} basis composed with the {ideal} basis")]
    BasisMismatch { channel: Basis, ideal: Basis },
    #[error("no {0} basis in the channel")]
    MissingBasis(Basis),
    #[error("stratum {0} out of range")]
    NoStratum(usize),
    #[error("Bloch vector norm {0} exceeds 1")]
    Norm(f64),
    #[error("invalid counts: {0}")]
    Counts(String),
    #[error("no shots in the {0} basis")]
    EmptyBasis(Basis),
    #[error("posterior weights are all zero")]
    ZeroWeights,
    #[error("reference readout is not deterministic")]
    NotDeterministic,
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Circuit(#[from] msd_pauli::Error),
    #[error(transparent)]
    Noisy(#[from] msd_noisy::NoisyError),
    #[error(transparent)]
    Decode(#[from] msd_decode::DecodeError),
}

pub type Result<T> = std::result::Result<T, ChannelError>;

pub(crate) fn basis_char(b: Basis) -> char {
    match b {
        Basis::X => 'X',
        Basis::Y => 'Y',
        Basis::Z => 'Z',
    }
}

pub(crate) fn parse_basis(s: &str) -> Result<Basis> {
    match s {
        "X" | "x" => Ok(Basis::X),
        "Y" | "y" => Ok(Basis::Y),
        "Z" | "z" => Ok(Basis::Z),
        _ => Err(ChannelError::Parse(format!("unknown basis `{s}`"))),
    }
}

/// Outcome word as a bit string, logical qubit 0 first.
pub fn word_string(w: u32) -> String {
    (0..5).map(|q| if w >> q & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_word(s: &str) -> Result<u32> {
    if s.len() != 5 || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(ChannelError::Parse(format!("bad outcome pattern `{s}`")));
    }
    Ok(s.bytes().enumerate().fold(0, |w, (q, b)| w | ((b - b'0') as u32) << q))
}
