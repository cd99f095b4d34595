use std::collections::HashMap;

use msd_noisy::{sample_map, DetectorModel};

use crate::{DecodeError, Result};

const MAX_DETECTORS: usize = 24;

/// Sampled lookup decoder: for each observed syndrome, how often each
/// logical-flip pattern accompanied it.
#[derive(Clone, Debug, PartialEq)]
pub struct MldTable {
    pub num_detectors: usize,
    pub num_observables: usize,
    /// Syndrome → 2^num_observables tallies indexed by flip pattern.
    pub tallies: HashMap<u128, Vec<u64>>,
    pub total: u64,
}

/// Stream `shots` samples of `model` into a table; deterministic in `seed`.
pub fn build_mld(model: &DetectorModel, shots: usize, seed: u64) -> Result<MldTable> {
    if model.num_detectors > MAX_DETECTORS {
        return Err(DecodeError::TooManyDetectors(model.num_detectors));
    }
    let width = 1usize << model.num_observables;
    let empty = || MldTable {
        num_detectors: model.num_detectors,
        num_observables: model.num_observables,
        tallies: HashMap::new(),
        total: 0,
    };
    let parts = sample_map(model, shots, seed, |recs| {
        let mut t = empty();
        for r in recs {
            t.tallies.entry(r.detectors).or_insert_with(|| vec![0; width])[r.observables as usize] += 1;
        }
        t.total = recs.len() as u64;
        t
    });
    Ok(parts.into_iter().fold(empty(), |mut a, b| {
        a.merge(&b);
        a
    }))
}

impl MldTable {
    /// Add another table's tallies (same shape).
    pub fn merge(&mut self, other: &MldTable) {
        let width = 1usize << self.num_observables;
        for (k, v) in &other.tallies {
            let e = self.tallies.entry(*k).or_insert_with(|| vec![0; width]);
            for (a, b) in e.iter_mut().zip(v) {
                *a += b;
            }
        }
        self.total += other.total;
    }

    pub fn keys(&self) -> usize {
        self.tallies.len()
    }

    /// Sum out detectors outside `det_mask` and observables outside
    /// `obs_mask`, renumbering the survivors compactly.
    pub fn marginal(&self, det_mask: u128, obs_mask: u32) -> MldTable {
        let l = obs_mask.count_ones() as usize;
        let mut out = MldTable {
            num_detectors: det_mask.count_ones() as usize,
            num_observables: l,
            tallies: HashMap::new(),
            total: self.total,
        };
        for (&k, v) in &self.tallies {
            let e = out.tallies.entry(pext(k, det_mask)).or_insert_with(|| vec![0; 1 << l]);
            for (pattern, &c) in v.iter().enumerate() {
                e[pext(pattern as u128, obs_mask as u128) as usize] += c;
            }
        }
        out
    }

    /// Most frequent flip pattern for `syndrome` (lowest pattern on ties)
    /// and its conditional frequency; `None` if the syndrome was never seen.
    pub fn lookup(&self, syndrome: u128) -> Option<(u32, f64)> {
        let v = self.tallies.get(&syndrome)?;
        let n: u64 = v.iter().sum();
        let (best, &c) = v.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
        Some((best as u32, c as f64 / n as f64))
    }
}

fn pext(x: u128, mask: u128) -> u128 {
    let (mut out, mut m, mut i) = (0u128, mask, 0);
    while m != 0 {
        let b = m.trailing_zeros();
        out |= (x >> b & 1) << i;
        m &= m - 1;
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use msd_noisy::Mechanism;

    fn model(mechs: &[(f64, u128, u32)]) -> DetectorModel {
        DetectorModel {
            num_detectors: 2,
            num_observables: 2,
            mechanisms: mechs
                .iter()
                .map(|&(p, detectors, observables)| Mechanism { p, detectors, observables, sources: vec![] })
                .collect(),
            faults: vec![],
            benign: vec![],
        }
    }

    #[test]
    fn zero_noise_gives_one_key() {
        let t = build_mld(&model(&[(0.0, 1, 1)]), 50_000, 1).unwrap();
        assert_eq!(t.keys(), 1);
        assert_eq!(t.tallies[&0], vec![50_000, 0, 0, 0]);
    }

    #[test]
    fn tallies_sum_to_total_and_are_seeded() {
        let m = model(&[(0.1, 1, 1), (0.05, 3, 0), (0.2, 2, 2)]);
        let t = build_mld(&m, 100_000, 4).unwrap();
        assert_eq!(t.tallies.values().flatten().sum::<u64>(), t.total);
        assert_eq!(t, build_mld(&m, 100_000, 4).unwrap());
        let (flip, f) = t.lookup(1).unwrap();
        assert_eq!(flip, 1);
        assert!(f > 0.5);
    }

    #[test]
    fn marginal_keeps_counts() {
        let m = model(&[(0.1, 1, 1), (0.05, 3, 0), (0.2, 2, 2)]);
        let t = build_mld(&m, 100_000, 4).unwrap();
        let g = t.marginal(0b01, 0b01);
        assert_eq!(g.tallies.values().flatten().sum::<u64>(), t.total);
        assert!(g.keys() <= 2);
        assert_eq!(g.tallies[&1].len(), 2);
    }

    #[test]
    fn too_many_detectors() {
        let mut m = model(&[]);
        m.num_detectors = 25;
        assert_eq!(build_mld(&m, 10, 0), Err(DecodeError::TooManyDetectors(25)));
    }
}
