//! Circuits for the five-block factory, the Pauli noise model, the detector
//! error model obtained by propagating every elementary fault, and two
//! independent samplers (from the model, and by direct frame simulation).

mod dem;
pub mod distill;
mod factory;
mod frame;
mod noise;
mod sample;

pub use dem::{instrument, DetectorModel, Mechanism};
pub use sample::{frame_sample, sample, sample_map, ShotRecord, SHARD_SHOTS};

pub use factory::{
    build_factory_circuit, build_injection_block, build_injection_readout, build_reference_factory,
    noiseless_record, reference_layers, BlockInput, FactoryLayout,
};
pub use frame::{propagate, FrameSim};
pub use noise::{faults, Fault, FaultKind, NoiseModel};


use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoisyError {
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("{0} detectors exceeds the 128 supported")]
    TooManyDetectors(usize),
    #[error("{0} observables exceeds the 32 supported")]
    TooManyObservables(usize),
    #[error("non-Clifford gate {0} in a noisy layer")]
    NonClifford(String),
    #[error("reference circuit is not deterministic: {0}")]
    NotDeterministic(String),
    #[error("invalid detector model text on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Circuit(#[from] msd_pauli::Error),
    #[error(transparent)]
    Code(#[from] msd_codes::CodeError),
    #[error(transparent)]
    Synth(#[from] msd_synth::SynthError),
}

pub type Result<T> = std::result::Result<T, NoisyError>;
