use std::collections::HashMap;

use msd_codes::CssCode;
use msd_decode::MleSolver;
use msd_noisy::{build_injection_readout, instrument, sample_map, BlockInput, NoiseModel};
use msd_pauli::{Basis, BlochVector};
use serde::{Deserialize, Serialize};

use crate::Result;

/// Logical flip tallies of a single injected block read out in one basis.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InjectionStats {
    pub shots: u64,
    /// Flips of the bare logical parity, no decoding.
    pub raw_flips: u64,
    /// Flips left after decoding every detector.
    pub corrected_flips: u64,
    /// Shots with no detector firing, and flips among them.
    pub perfect_shots: u64,
    pub perfect_flips: u64,
}

impl InjectionStats {
    pub fn raw_rate(&self) -> f64 {
        self.raw_flips as f64 / self.shots.max(1) as f64
    }

    pub fn corrected_rate(&self) -> f64 {
        self.corrected_flips as f64 / self.shots.max(1) as f64
    }

    pub fn perfect_rate(&self) -> f64 {
        self.perfect_flips as f64 / self.perfect_shots.max(1) as f64
    }

    pub fn perfect_fraction(&self) -> f64 {
        self.perfect_shots as f64 / self.shots.max(1) as f64
    }

    fn merge(mut self, o: InjectionStats) -> InjectionStats {
        self.shots += o.shots;
        self.raw_flips += o.raw_flips;
        self.corrected_flips += o.corrected_flips;
        self.perfect_shots += o.perfect_shots;
        self.perfect_flips += o.perfect_flips;
        self
    }
}

/// Input Bloch component along `basis` seen through a flip rate.
pub fn flipped_component(input: &BlochVector, basis: Basis, rate: f64) -> f64 {
    input.component(basis.index()) * (1.0 - 2.0 * rate)
}

/// Sample the injection block with its deterministic reference input and
/// tally logical flips raw, decoded, and on perfect-stabilizer shots.
pub fn learn_injection(code: &CssCode, noise: &NoiseModel, basis: Basis, shots: usize, seed: u64) -> Result<InjectionStats> {
    let (circuit, _) = build_injection_readout(code, BlockInput::Reference, basis)?;
    let model = instrument(&circuit, noise)?;
    let solver = MleSolver::new(&model, model.detector_mask(), 1)?;
    let parts = sample_map(&model, shots, seed, |recs| -> Result<InjectionStats> {
        let mut memo: HashMap<u128, u32> = HashMap::new();
        let mut st = InjectionStats { shots: recs.len() as u64, ..Default::default() };
        for r in recs {
            let flips = match memo.get(&r.detectors) {
                Some(&f) => f,
                None => {
                    let s = solver.solve(solver.syndrome_of(r.detectors))?;
                    let f = solver.expand_logical(s.logical);
                    memo.insert(r.detectors, f);
                    f
                }
            };
            let raw = (r.observables & 1) as u64;
            st.raw_flips += raw;
            st.corrected_flips += ((r.observables ^ flips) & 1) as u64;
            if r.detectors == 0 {
                st.perfect_shots += 1;
                st.perfect_flips += raw;
            }
        }
        Ok(st)
    });
    let mut total = InjectionStats::default();
    for p in parts {
        total = total.merge(p?);
    }
    Ok(total)
}
