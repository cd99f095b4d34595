use msd_pauli::Circuit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dem::DetectorModel;
use crate::frame::propagate;
use crate::noise::{faults, NoiseModel};
use crate::Result;

/// Detector flips and raw observable flips of one shot (bit i = index i).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShotRecord {
    pub detectors: u128,
    pub observables: u32,
}

/// Shots per shard. Shard k always uses RNG stream k, so output depends
/// only on (seed, shots), not on the thread count.
pub const SHARD_SHOTS: usize = 1 << 14;

fn shards(shots: usize) -> impl IndexedParallelIterator<Item = (usize, usize)> {
    let count = shots.div_ceil(SHARD_SHOTS);
    (0..count).into_par_iter().map(move |k| (k, SHARD_SHOTS.min(shots - k * SHARD_SHOTS)))
}

fn shard_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Visit the lanes in `0..len` where an event of probability `p` fires,
/// by geometric skipping.
fn for_each_firing(rng: &mut ChaCha8Rng, p: f64, len: usize, mut f: impl FnMut(usize)) {
    if p <= 0.0 {
        return;
    }
    let log_q = (-p).ln_1p();
    let mut pos = 0usize;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if skip >= (len - pos) as f64 {
            return;
        }
        pos += skip as usize;
        f(pos);
        pos += 1;
        if pos >= len {
            return;
        }
    }
}

fn sample_shard(model: &DetectorModel, seed: u64, k: usize, len: usize) -> Vec<ShotRecord> {
    let mut rng = shard_rng(seed, k as u64);
    let mut out = vec![ShotRecord::default(); len];
    for m in &model.mechanisms {
        for_each_firing(&mut rng, m.p, len, |s| {
            out[s].detectors ^= m.detectors;
            out[s].observables ^= m.observables;
        });
    }
    out
}

/// Independent firing of every mechanism, shot by shot.
pub fn sample(model: &DetectorModel, shots: usize, seed: u64) -> Vec<ShotRecord> {
    sample_map(model, shots, seed, |recs| recs.to_vec()).into_iter().flatten().collect()
}

/// Sample shard by shard and hand each shard to `f`; results come back in
/// shard order. Keeps memory bounded for large runs.
pub fn sample_map<T: Send>(
    model: &DetectorModel,
    shots: usize,
    seed: u64,
    f: impl Fn(&[ShotRecord]) -> T + Sync,
) -> Vec<T> {
    shards(shots).map(|(k, len)| f(&sample_shard(model, seed, k, len))).collect()
}

/// Direct simulation: every elementary fault fires independently in every
/// shot and the Pauli frames are pushed through the circuit, 64 shots per
/// word. Uses no detector model at all.
pub fn frame_sample(circuit: &Circuit, noise: &NoiseModel, shots: usize, seed: u64) -> Result<Vec<ShotRecord>> {
    let faults = faults(circuit, noise)?;
    let parts: Vec<Result<Vec<ShotRecord>>> = shards(shots)
        .map(|(k, len)| {
            // separate stream family from `sample`
            let mut rng = shard_rng(seed, (1u64 << 40) + k as u64);
            let mut by_time: Vec<Vec<(usize, usize)>> = vec![Vec::new(); circuit.layers.len() + 1];
            for (j, f) in faults.iter().enumerate() {
                for_each_firing(&mut rng, f.p, len, |s| by_time[f.time].push((j, s)));
            }
            let meas = propagate(circuit, len, |t, sim| {
                for &(j, s) in &by_time[t] {
                    for &(q, p) in &faults[j].paulis {
                        sim.flip(q, p, s);
                    }
                }
            })?;
            let mut out = vec![ShotRecord::default(); len];
            let mut fold = |idx: &[usize], set: &mut dyn FnMut(&mut ShotRecord)| {
                let words = len.div_ceil(64);
                for w in 0..words {
                    let mut acc = 0u64;
                    for &m in idx {
                        acc ^= meas[m][w];
                    }
                    while acc != 0 {
                        let b = acc.trailing_zeros() as usize;
                        acc &= acc - 1;
                        set(&mut out[w * 64 + b]);
                    }
                }
            };
            for (i, d) in circuit.detectors.iter().enumerate() {
                fold(d, &mut |r| r.detectors ^= 1 << i);
            }
            for (i, o) in circuit.observables.iter().enumerate() {
                fold(o, &mut |r| r.observables ^= 1 << i);
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(shots);
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dem::Mechanism;

    fn toy(p: f64) -> DetectorModel {
        DetectorModel {
            num_detectors: 1,
            num_observables: 0,
            mechanisms: vec![Mechanism { p, detectors: 1, observables: 0, sources: vec![] }],
            faults: vec![],
            benign: vec![],
        }
    }

    #[test]
    fn zero_probability_gives_zero_records() {
        assert!(sample(&toy(0.0), 10_000, 1).iter().all(|r| *r == ShotRecord::default()));
    }

    #[test]
    fn half_probability_bernoulli() {
        let n = 1_000_000;
        let hits = sample(&toy(0.5), n, 7).iter().filter(|r| r.detectors == 1).count() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((hits - 0.5 * n as f64).abs() < 3.0 * sigma, "{hits}");
    }

    #[test]
    fn deterministic_under_seed() {
        assert_eq!(sample(&toy(0.01), 50_000, 3), sample(&toy(0.01), 50_000, 3));
        assert_ne!(sample(&toy(0.01), 50_000, 3), sample(&toy(0.01), 50_000, 4));
    }

    #[test]
    fn geometric_skipping_rate() {
        let mut rng = shard_rng(9, 0);
        let mut count = 0usize;
        for _ in 0..100 {
            for_each_firing(&mut rng, 0.003, 10_000, |_| count += 1);
        }
        let mean = 0.003 * 1e6;
        assert!((count as f64 - mean).abs() < 4.0 * mean.sqrt());
    }
}
