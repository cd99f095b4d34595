use std::collections::HashMap;
use std::fmt::Write as _;

use msd_pauli::Circuit;

use crate::frame::propagate;
use crate::noise::{faults, Fault, NoiseModel};
use crate::{NoisyError, Result};

/// A merged error mechanism: the detectors and observables it flips and
/// the probability that an odd number of its source faults fire.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism {
    pub p: f64,
    pub detectors: u128,
    pub observables: u32,
    /// Indices into [`DetectorModel::faults`].
    pub sources: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorModel {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub mechanisms: Vec<Mechanism>,
    /// Every elementary fault, including the benign ones (no flips) that
    /// were dropped from `mechanisms`.
    pub faults: Vec<Fault>,
    pub benign: Vec<usize>,
}

fn xor_p(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// Propagate every fault to the measurements in one bit-sliced pass (one
/// lane per fault) and merge faults with identical effect.
pub fn instrument(circuit: &Circuit, noise: &NoiseModel) -> Result<DetectorModel> {
    if circuit.detectors.len() > 128 {
        return Err(NoisyError::TooManyDetectors(circuit.detectors.len()));
    }
    if circuit.observables.len() > 32 {
        return Err(NoisyError::TooManyObservables(circuit.observables.len()));
    }
    let faults = faults(circuit, noise)?;
    let columns = fault_columns(circuit, &faults)?;
    let mut index: HashMap<(u128, u32), usize> = HashMap::new();
    let mut mechanisms: Vec<Mechanism> = Vec::new();
    let mut benign = Vec::new();
    for (j, &(d, o)) in columns.iter().enumerate() {
        if d == 0 && o == 0 {
            benign.push(j);
            continue;
        }
        match index.get(&(d, o)) {
            Some(&k) => {
                let m = &mut mechanisms[k];
                m.p = xor_p(m.p, faults[j].p);
                m.sources.push(j);
            }
            None => {
                index.insert((d, o), mechanisms.len());
                mechanisms.push(Mechanism { p: faults[j].p, detectors: d, observables: o, sources: vec![j] });
            }
        }
    }
    Ok(DetectorModel {
        num_detectors: circuit.detectors.len(),
        num_observables: circuit.observables.len(),
        mechanisms,
        faults,
        benign,
    })
}

/// (detector mask, observable mask) of each fault on its own.
pub(crate) fn fault_columns(circuit: &Circuit, faults: &[Fault]) -> Result<Vec<(u128, u32)>> {
    let mut by_time: Vec<Vec<usize>> = vec![Vec::new(); circuit.layers.len() + 1];
    for (j, f) in faults.iter().enumerate() {
        by_time[f.time].push(j);
    }
    let meas = propagate(circuit, faults.len(), |t, sim| {
        for &j in &by_time[t] {
            for &(q, p) in &faults[j].paulis {
                sim.flip(q, p, j);
            }
        }
    })?;
    let words = faults.len().div_ceil(64).max(1);
    let parity = |idx: &[usize]| -> Vec<u64> {
        let mut acc = vec![0u64; words];
        for &m in idx {
            for (a, w) in acc.iter_mut().zip(&meas[m]) {
                *a ^= w;
            }
        }
        acc
    };
    let det: Vec<Vec<u64>> = circuit.detectors.iter().map(|d| parity(d)).collect();
    let obs: Vec<Vec<u64>> = circuit.observables.iter().map(|o| parity(o)).collect();
    Ok((0..faults.len())
        .map(|j| {
            let bit = |v: &Vec<u64>| v[j / 64] >> (j % 64) & 1;
            let d = det.iter().enumerate().fold(0u128, |m, (i, v)| m | (bit(v) as u128) << i);
            let o = obs.iter().enumerate().fold(0u32, |m, (i, v)| m | (bit(v) as u32) << i);
            (d, o)
        })
        .collect())
}

impl DetectorModel {
    pub fn num_mechanisms(&self) -> usize {
        self.mechanisms.len()
    }

    pub fn detector_mask(&self) -> u128 {
        if self.num_detectors == 0 {
            0
        } else {
            u128::MAX >> (128 - self.num_detectors)
        }
    }

    /// First-order expected detector firing rates.
    pub fn linearized_detector_means(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.num_detectors];
        for m in &self.mechanisms {
            for (i, x) in v.iter_mut().enumerate() {
                if m.detectors >> i & 1 == 1 {
                    *x += m.p;
                }
            }
        }
        v
    }

    /// Exact firing probabilities: a detector fires when an odd number of
    /// its mechanisms do.
    pub fn detector_means(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.num_detectors];
        for m in &self.mechanisms {
            for (i, x) in v.iter_mut().enumerate() {
                if m.detectors >> i & 1 == 1 {
                    *x = xor_p(*x, m.p);
                }
            }
        }
        v
    }

    /// One mechanism per line: `p D.. L..`.
    pub fn to_text(&self) -> String {
        let mut s = format!("# detectors {} observables {}\n", self.num_detectors, self.num_observables);
        for m in &self.mechanisms {
            let _ = write!(s, "{:e}", m.p);
            for i in 0..self.num_detectors {
                if m.detectors >> i & 1 == 1 {
                    let _ = write!(s, " D{i}");
                }
            }
            for i in 0..self.num_observables {
                if m.observables >> i & 1 == 1 {
                    let _ = write!(s, " L{i}");
                }
            }
            s.push('\n');
        }
        s
    }

    /// Parse [`to_text`](Self::to_text) output. Provenance is not stored in
    /// the text form, so `faults` comes back empty.
    pub fn from_text(text: &str) -> Result<DetectorModel> {
        let mut num_detectors = 0;
        let mut num_observables = 0;
        let mut mechanisms = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let err = |msg: &str| NoisyError::Parse { line: i + 1, msg: msg.into() };
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                let t: Vec<&str> = rest.split_whitespace().collect();
                if let ["detectors", d, "observables", o] = t[..] {
                    num_detectors = d.parse().map_err(|_| err("bad detector count"))?;
                    num_observables = o.parse().map_err(|_| err("bad observable count"))?;
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            let p: f64 = toks.next().unwrap().parse().map_err(|_| err("bad probability"))?;
            let (mut d, mut o) = (0u128, 0u32);
            for t in toks {
                let idx = |s: &str| s.parse::<usize>().map_err(|_| err("bad index"));
                if let Some(k) = t.strip_prefix('D') {
                    let k = idx(k)?;
                    if k >= 128 {
                        return Err(err("detector index too large"));
                    }
                    d |= 1 << k;
                } else if let Some(k) = t.strip_prefix('L') {
                    let k = idx(k)?;
                    if k >= 32 {
                        return Err(err("observable index too large"));
                    }
                    o |= 1 << k;
                } else {
                    return Err(err("expected D<k> or L<k>"));
                }
            }
            mechanisms.push(Mechanism { p, detectors: d, observables: o, sources: vec![] });
        }
        Ok(DetectorModel { num_detectors, num_observables, mechanisms, faults: vec![], benign: vec![] })
    }
}
