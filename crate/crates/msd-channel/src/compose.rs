use msd_noisy::distill::{accepted, OUTPUT_BIT};
use msd_pauli::{Basis, BlochVector};

use crate::bayes::BasisCounts;
use crate::ideal::{fidelity_of, IdealBasis, IdealChannel};
use crate::learn::{BasisChannel, LogicalChannel};
use crate::{ChannelError, Result};

/// Accepted-output statistics for one readout basis after the learned flips.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisOutcome {
    pub basis: Basis,
    /// Shots of the reference run kept by the stratum.
    pub kept_shots: u64,
    pub kept_fraction: f64,
    /// Factory acceptance among kept shots.
    pub acceptance: f64,
    /// Output expectation conditioned on acceptance.
    pub expectation: f64,
    /// Sampling error of `expectation` from the finite reference run.
    pub expectation_sigma: f64,
}

impl BasisOutcome {
    pub fn accepted_fraction(&self) -> f64 {
        self.kept_fraction * self.acceptance
    }
}

/// Per flip pattern r: the accepted mass and signed output mass of the
/// ideal outcomes once r is applied.
fn displaced(ideal: &IdealBasis) -> [(f64, f64); 32] {
    let mut out = [(0.0, 0.0); 32];
    for (r, o) in out.iter_mut().enumerate() {
        for (w, &p) in ideal.joint.iter().enumerate() {
            let v = (w ^ r) as u32;
            if accepted(v) {
                o.0 += p;
                o.1 += if v & OUTPUT_BIT == 0 { p } else { -p };
            }
        }
    }
    out
}

/// Push the ideal outcome distribution through the learned flips of one
/// stratum: P(w') = Σ_r E(r) C(w' ⊕ r).
pub fn compose_basis(channel: &BasisChannel, stratum: usize, ideal: &IdealBasis) -> Result<BasisOutcome> {
    if channel.basis != ideal.basis {
        return Err(ChannelError::BasisMismatch { channel: channel.basis, ideal: ideal.basis });
    }
    let s = channel.strata.get(stratum).ok_or(ChannelError::NoStratum(stratum))?;
    let e = s.distribution()?;
    let table = displaced(ideal);
    let (mut a, mut b) = (0.0, 0.0);
    for (r, &p) in e.iter().enumerate() {
        b += p * table[r].0;
        a += p * table[r].1;
    }
    let v = a / b;
    // delta method for a ratio of means over the kept shots
    let var: f64 = e.iter().enumerate().map(|(r, &p)| p * (table[r].1 - v * table[r].0).powi(2)).sum();
    let sigma = (var / s.kept as f64).sqrt() / b;
    Ok(BasisOutcome {
        basis: channel.basis,
        kept_shots: s.kept,
        kept_fraction: s.kept as f64 / channel.shots.max(1) as f64,
        acceptance: b,
        expectation: v,
        expectation_sigma: sigma,
    })
}

/// All three bases composed and assembled into the output Bloch vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Composed {
    pub bases: [BasisOutcome; 3],
    /// Each component comes from its own basis, so the vector may sit
    /// slightly outside the ball when the channels are noisy.
    pub bloch: BlochVector,
    pub fidelity: f64,
    pub fidelity_sigma: f64,
}

impl Composed {
    pub fn kept_fraction(&self) -> f64 {
        self.bases.iter().map(|b| b.kept_fraction).sum::<f64>() / 3.0
    }

    pub fn acceptance(&self) -> f64 {
        self.bases.iter().map(|b| b.acceptance).sum::<f64>() / 3.0
    }

    /// Stratum kept fraction times factory acceptance, averaged over bases.
    pub fn accepted_fraction(&self) -> f64 {
        self.bases.iter().map(|b| b.accepted_fraction()).sum::<f64>() / 3.0
    }

    /// Counts a direct experiment with `shots_per_basis` magic-input runs
    /// would see: accepted shots and +1 outputs.
    pub fn effective_counts(&self, shots_per_basis: u64) -> [BasisCounts; 3] {
        self.bases.clone().map(|b| {
            let n = (shots_per_basis as f64 * b.accepted_fraction()).round() as u64;
            let plus = ((n as f64 * (1.0 + b.expectation) / 2.0).round() as u64).min(n);
            BasisCounts { shots: n, plus }
        })
    }
}

pub fn compose(channel: &LogicalChannel, stratum: usize, ideal: &IdealChannel) -> Result<Composed> {
    let one = |b: Basis| compose_basis(channel.basis(b)?, stratum, ideal.basis(b));
    let bases = [one(Basis::X)?, one(Basis::Y)?, one(Basis::Z)?];
    let [x, y, z] = [0, 1, 2].map(|i| bases[i].expectation);
    let bloch = BlochVector { x, y, z };
    let fidelity_sigma = bases.iter().map(|b| b.expectation_sigma.powi(2)).sum::<f64>().sqrt() / (2.0 * 3f64.sqrt());
    Ok(Composed { fidelity: fidelity_of(&bloch), bloch, fidelity_sigma, bases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::ideal_channel;
    use crate::learn::{Cut, Stratum};
    use msd_noisy::distill::ANCILLA_MASK;

    fn channel(basis: Basis, counts: &[(u32, u64)]) -> BasisChannel {
        let mut c = vec![0; 32];
        for &(w, n) in counts {
            c[w as usize] += n;
        }
        let kept = c.iter().sum();
        BasisChannel { basis, shots: kept, offset: 0, stages_agree: kept, strata: vec![Stratum { cut: Cut::All, kept, counts: c }] }
    }

    fn all_bases(counts: &[(u32, u64)]) -> LogicalChannel {
        LogicalChannel { bases: Basis::ALL.iter().map(|&b| channel(b, counts)).collect() }
    }

    #[test]
    fn identity_channel_reproduces_the_ideal() {
        let ideal = ideal_channel(&[0.1, 0.2, 0.0, -0.1, 0.3]).unwrap();
        let c = compose(&all_bases(&[(0, 10)]), 0, &ideal).unwrap();
        assert!((c.acceptance() - ideal.acceptance()).abs() < 1e-12);
        for i in 0..3 {
            assert!((c.bloch.component(i) - ideal.output_bloch().component(i)).abs() < 1e-12);
        }
        assert!(c.fidelity_sigma < 1e-12);
    }

    #[test]
    fn output_flip_scales_the_component() {
        let ideal = ideal_channel(&[0.2; 5]).unwrap();
        let q = 0.125;
        let c = compose(&all_bases(&[(0, 7), (OUTPUT_BIT, 1)]), 0, &ideal).unwrap();
        for i in 0..3 {
            let want = (1.0 - 2.0 * q) * ideal.output_bloch().component(i);
            assert!((c.bloch.component(i) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn syndrome_flip_mixes_in_the_displaced_rate() {
        let ideal = ideal_channel(&[0.0; 5]).unwrap();
        let z = ideal.basis(Basis::Z);
        let q = 0.25;
        let flip = 1u32 << 2;
        let c = compose_basis(&channel(Basis::Z, &[(0, 3), (flip, 1)]), 0, z).unwrap();
        // rate of ancilla outcomes that the flip carries onto the accept pattern
        let syn = z.syndrome_distribution();
        let displaced = syn[((msd_noisy::distill::ACCEPT_WORD ^ flip) & ANCILLA_MASK) as usize];
        let want = (1.0 - q) / 6.0 + q * displaced;
        assert!((c.acceptance - want).abs() < 1e-12);
    }

    #[test]
    fn basis_mismatch_is_an_error() {
        let ideal = ideal_channel(&[0.0; 5]).unwrap();
        let r = compose_basis(&channel(Basis::X, &[(0, 1)]), 0, ideal.basis(Basis::Z));
        assert!(matches!(r, Err(ChannelError::BasisMismatch { .. })));
        assert!(matches!(compose_basis(&channel(Basis::X, &[(0, 1)]), 3, ideal.basis(Basis::X)), Err(ChannelError::NoStratum(3))));
    }
}
