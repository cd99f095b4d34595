//! Experiment orchestration: a TOML config, the injection and factory
//! pipelines built from the simulation crates, and deterministic report
//! files.

mod config;
mod emit;
mod factory;
mod injection;
mod report;

pub use config::{Decoder, ExperimentConfig, Format, NoiseConfig, OutputConfig, Overrides, SweepConfig};
pub use emit::{emit, CURVE_HEADER};
pub use factory::{crossing, factory_section, run_factory};
pub use injection::{injection_section, run_injection, InjectionRun};
pub use report::{
    AnglePoint, BasisRates, CurvePoint, Estimate, FactorySection, InjectionSection, PhiPoint, Provenance, RescalePoint,
    Report,
};

use msd_channel::{bayes_interval, BasisCounts, ChannelError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Noisy(#[from] msd_noisy::NoisyError),
    #[error(transparent)]
    Code(#[from] msd_codes::CodeError),
    #[error(transparent)]
    Pauli(#[from] msd_pauli::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Independent stream for one part of a run.
pub(crate) fn sub_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(tag.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counts a run of `shots[b]` readouts with expectations `v[b]` would give.
pub(crate) fn expected_counts(v: [f64; 3], shots: [u64; 3]) -> [BasisCounts; 3] {
    [0, 1, 2].map(|b| {
        let n = shots[b];
        let plus = ((n as f64 * (1.0 + v[b]) / 2.0).round().max(0.0) as u64).min(n);
        BasisCounts { shots: n, plus }
    })
}

pub(crate) fn estimate(fidelity: f64, counts: &[BasisCounts; 3], samples: usize, seed: u64) -> Result<Estimate> {
    let i = bayes_interval(counts, samples, seed)?;
    Ok(Estimate { fidelity, median: i.median, ci_lo: i.lo, ci_hi: i.hi })
}

pub(crate) fn fidelity_of(v: [f64; 3]) -> f64 {
    0.5 + (v[0] + v[1] + v[2]) / (2.0 * 3f64.sqrt())
}
