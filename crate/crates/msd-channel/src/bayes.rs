//! Bloch-ball posterior under a uniform prior and binomial outcome counts.
//!
//! With u_b = (1+v_b)/2 the likelihood of each basis is a Beta kernel, so
//! drawing u_b ~ Beta(m_b+1, n_b−m_b+1) independently and rejecting points
//! outside the ball samples the posterior exactly. Data that pushes the
//! mass far outside the ball falls back to likelihood-weighted uniform
//! points.

use msd_pauli::{Basis, BlochVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ideal::fidelity_of;
use crate::{ChannelError, Result};

const SHARD: usize = 1 << 14;
/// Proposals per requested sample before giving up on rejection.
const MAX_PROPOSALS: usize = 200;

/// Outcomes in one basis: `plus` of `shots` read +1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisCounts {
    pub shots: u64,
    pub plus: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub median: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Fidelity with the (1,1,1)/√3 magic state.
pub fn magic_fidelity(v: &BlochVector) -> Result<f64> {
    if v.norm_sqr() > 1.0 + 1e-9 {
        return Err(ChannelError::Norm(v.norm()));
    }
    Ok(fidelity_of(v))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    pub samples: Vec<[f64; 3]>,
    /// Normalized to sum 1.
    pub weights: Vec<f64>,
}

impl Posterior {
    pub fn fidelities(&self) -> Vec<f64> {
        self.samples.iter().map(|&[x, y, z]| fidelity_of(&BlochVector { x, y, z })).collect()
    }

    pub fn mean_fidelity(&self) -> f64 {
        self.fidelities().iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }

    /// Weighted quantiles of the fidelity.
    pub fn quantiles(&self, qs: &[f64]) -> Vec<f64> {
        let f = self.fidelities();
        let mut idx: Vec<usize> = (0..f.len()).collect();
        idx.sort_by(|&a, &b| f[a].total_cmp(&f[b]));
        let mut out = Vec::with_capacity(qs.len());
        for &q in qs {
            let mut acc = 0.0;
            let mut val = f[*idx.last().unwrap()];
            for &i in &idx {
                acc += self.weights[i];
                if acc >= q {
                    val = f[i];
                    break;
                }
            }
            out.push(val);
        }
        out
    }

    /// Median and central 68% interval.
    pub fn interval(&self) -> Interval {
        let q = self.quantiles(&[0.5, 0.16, 0.84]);
        Interval { median: q[0], lo: q[1], hi: q[2] }
    }
}

fn check(counts: &[BasisCounts; 3]) -> Result<()> {
    for (i, c) in counts.iter().enumerate() {
        if c.plus > c.shots {
            return Err(ChannelError::Counts(format!("basis {i}: {} of {} shots", c.plus, c.shots)));
        }
    }
    Ok(())
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn shards(samples: usize) -> Vec<(usize, usize)> {
    (0..samples.div_ceil(SHARD)).map(|k| (k, SHARD.min(samples - k * SHARD))).collect()
}

fn rejection(counts: &[BasisCounts; 3], samples: usize, seed: u64) -> Option<Vec<[f64; 3]>> {
    let betas: Vec<Beta<f64>> = counts
        .iter()
        .map(|c| Beta::new((c.plus + 1) as f64, (c.shots - c.plus + 1) as f64).expect("positive shape"))
        .collect();
    let parts: Vec<Option<Vec<[f64; 3]>>> = shards(samples)
        .into_par_iter()
        .map(|(k, len)| {
            let mut rng = rng_for(seed, k as u64);
            let mut out = Vec::with_capacity(len);
            let mut tries = 0;
            while out.len() < len {
                tries += 1;
                if tries > MAX_PROPOSALS * len {
                    return None;
                }
                let v = [0, 1, 2].map(|b| 2.0 * betas[b].sample(&mut rng) - 1.0);
                if v[0] * v[0] + v[1] * v[1] + v[2] * v[2] <= 1.0 {
                    out.push(v);
                }
            }
            Some(out)
        })
        .collect();
    let mut all = Vec::with_capacity(samples);
    for p in parts {
        all.extend(p?);
    }
    Some(all)
}

fn uniform_ball(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [0; 3].map(|_| rng.random::<f64>() * 2.0 - 1.0);
        if v[0] * v[0] + v[1] * v[1] + v[2] * v[2] <= 1.0 {
            return v;
        }
    }
}

fn log_likelihood(counts: &[BasisCounts; 3], v: &[f64; 3]) -> f64 {
    let mut l = 0.0;
    for (c, &x) in counts.iter().zip(v) {
        let (up, down) = ((1.0 + x) / 2.0, (1.0 - x) / 2.0);
        let minus = c.shots - c.plus;
        if c.plus > 0 {
            l += c.plus as f64 * up.ln();
        }
        if minus > 0 {
            l += minus as f64 * down.ln();
        }
    }
    l
}

fn importance(counts: &[BasisCounts; 3], samples: usize, seed: u64) -> Result<Posterior> {
    let pts: Vec<[f64; 3]> = shards(samples)
        .into_par_iter()
        .flat_map_iter(|(k, len)| {
            let mut rng = rng_for(seed, (1u64 << 40) + k as u64);
            (0..len).map(move |_| uniform_ball(&mut rng)).collect::<Vec<_>>()
        })
        .collect();
    let logs: Vec<f64> = pts.iter().map(|v| log_likelihood(counts, v)).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(ChannelError::ZeroWeights);
    }
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    Ok(Posterior { samples: pts, weights: w.iter().map(|x| x / total).collect() })
}

/// Posterior sample set over the ball for per-basis counts (X, Y, Z).
pub fn posterior(counts: &[BasisCounts; 3], samples: usize, seed: u64) -> Result<Posterior> {
    check(counts)?;
    if samples == 0 {
        return Err(ChannelError::Counts("no posterior samples requested".into()));
    }
    match rejection(counts, samples, seed) {
        Some(s) => {
            let n = s.len();
            Ok(Posterior { samples: s, weights: vec![1.0 / n as f64; n] })
        }
        None => importance(counts, samples, seed),
    }
}

/// Median fidelity and central 68% credible interval.
pub fn bayes_interval(counts: &[BasisCounts; 3], samples: usize, seed: u64) -> Result<Interval> {
    Ok(posterior(counts, samples, seed)?.interval())
}

/// Bloch estimate from per-basis outcomes (`true` = read −1 relative to the
/// target) with the counts for [`bayes_interval`]. Components come from
/// separate bases and are not projected into the ball.
pub fn tomography_estimate(outcomes: [&[bool]; 3]) -> Result<(BlochVector, [BasisCounts; 3])> {
    let mut counts = [BasisCounts::default(); 3];
    for (i, o) in outcomes.iter().enumerate() {
        if o.is_empty() {
            return Err(ChannelError::EmptyBasis(Basis::ALL[i]));
        }
        let minus = o.iter().filter(|&&b| b).count() as u64;
        counts[i] = BasisCounts { shots: o.len() as u64, plus: o.len() as u64 - minus };
    }
    let [x, y, z] = counts.map(|c| 2.0 * c.plus as f64 / c.shots as f64 - 1.0);
    Ok((BlochVector { x, y, z }, counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_examples() {
        let r = 1.0 / 3f64.sqrt();
        assert!((magic_fidelity(&BlochVector { x: r, y: r, z: r }).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(magic_fidelity(&BlochVector::zero()).unwrap(), 0.5);
        assert!(magic_fidelity(&BlochVector { x: -r, y: -r, z: -r }).unwrap().abs() < 1e-12);
        assert!(matches!(magic_fidelity(&BlochVector { x: 1.0, y: 1.0, z: 0.0 }), Err(ChannelError::Norm(_))));
    }

    #[test]
    fn impossible_counts_are_rejected() {
        let c = [BasisCounts { shots: 3, plus: 4 }, BasisCounts::default(), BasisCounts::default()];
        assert!(matches!(posterior(&c, 100, 0), Err(ChannelError::Counts(_))));
    }

    #[test]
    fn importance_fallback_agrees_with_rejection() {
        let c = [BasisCounts { shots: 40, plus: 30 }, BasisCounts { shots: 40, plus: 25 }, BasisCounts { shots: 40, plus: 12 }];
        let a = posterior(&c, 200_000, 3).unwrap().mean_fidelity();
        let b = importance(&c, 400_000, 3).unwrap().mean_fidelity();
        assert!((a - b).abs() < 0.005, "{a} {b}");
    }

    #[test]
    fn tomography_counts() {
        let x = [false, false, true, false];
        let (v, c) = tomography_estimate([&x, &[false], &[true, true]]).unwrap();
        assert_eq!(c[0], BasisCounts { shots: 4, plus: 3 });
        assert_eq!((v.x, v.y, v.z), (0.5, 1.0, -1.0));
        assert!(matches!(tomography_estimate([&x, &[], &x]), Err(ChannelError::EmptyBasis(Basis::Y))));
    }
}
