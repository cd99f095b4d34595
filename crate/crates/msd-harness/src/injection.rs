use std::f64::consts::PI;

use msd_channel::{learn_injection, InjectionStats};
use msd_codes::color_code;
use msd_noisy::NoiseModel;
use msd_pauli::{bloch_of, Basis, DenseState, Gate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::report::{BasisRates, Estimate, InjectionSection, PhiPoint, Report};
use crate::{estimate, expected_counts, fidelity_of, sub_seed, Result};

const INJECT: u64 = 0x696e;

/// Learned logical flip rates of the injection block in each basis.
#[derive(Clone, Debug, PartialEq)]
pub struct InjectionRun {
    pub stats: [InjectionStats; 3],
}

impl InjectionRun {
    pub fn learn(distance: usize, noise: &NoiseModel, shots_per_basis: usize, seed: u64) -> Result<InjectionRun> {
        let code = color_code(distance)?;
        let one = |b: Basis| learn_injection(&code, noise, b, shots_per_basis, sub_seed(seed, INJECT + b.index() as u64));
        Ok(InjectionRun { stats: [one(Basis::X)?, one(Basis::Y)?, one(Basis::Z)?] })
    }

    /// Raw, error-corrected and perfect-stabilizer estimates for `input`.
    pub fn estimates(&self, input: [f64; 3], samples: usize, seed: u64) -> Result<[Estimate; 3]> {
        let s = &self.stats;
        let variants: [([f64; 3], [u64; 3]); 3] = [
            ([0, 1, 2].map(|b| s[b].raw_rate()), s.clone().map(|x| x.shots)),
            ([0, 1, 2].map(|b| s[b].corrected_rate()), s.clone().map(|x| x.shots)),
            ([0, 1, 2].map(|b| s[b].perfect_rate()), s.clone().map(|x| x.perfect_shots)),
        ];
        let mut out = Vec::with_capacity(3);
        for (k, (rate, shots)) in variants.into_iter().enumerate() {
            let v = [0, 1, 2].map(|b| input[b] * (1.0 - 2.0 * rate[b]));
            out.push(estimate(fidelity_of(v), &expected_counts(v, shots), samples, sub_seed(seed, k as u64))?);
        }
        Ok([out[0], out[1], out[2]])
    }

    pub fn corrected(&self, input: [f64; 3], samples: usize, seed: u64) -> Result<Estimate> {
        Ok(self.estimates(input, samples, seed)?[1])
    }
}

/// Mean input Bloch vector of the five blocks: magic states rotated by the
/// configured angles.
pub(crate) fn mean_input(angles: &[f64; 5]) -> Result<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut acc = [0.0; 3];
    for &a in angles {
        let mut s = DenseState::zero(1)?;
        s.apply(Gate::PrepMagic, &[0], &mut rng)?;
        s.apply(Gate::Rz(a), &[0], &mut rng)?;
        let v = bloch_of(&s, 0)?.as_array();
        for i in 0..3 {
            acc[i] += v[i] / 5.0;
        }
    }
    Ok(acc)
}

pub fn injection_section(config: &ExperimentConfig) -> Result<(InjectionSection, InjectionRun)> {
    config.validate()?;
    let n = config.shots_per_basis();
    let run = InjectionRun::learn(config.distance, &config.noise.model(), n, config.seed)?;
    let input = mean_input(&config.angles)?;
    let [raw, corrected, perfect] = run.estimates(input, config.posterior_samples, sub_seed(config.seed, INJECT + 10))?;
    let bases = Basis::ALL
        .iter()
        .map(|&b| {
            let s = &run.stats[b.index()];
            BasisRates {
                basis: b.to_string(),
                raw: s.raw_rate(),
                corrected: s.corrected_rate(),
                perfect: s.perfect_rate(),
                perfect_fraction: s.perfect_fraction(),
            }
        })
        .collect();
    let mut phi_sweep = Vec::new();
    for k in 0..config.sweep.phi_points {
        let phi = 2.0 * PI * k as f64 / config.sweep.phi_points as f64;
        let v = [phi.cos(), phi.sin(), 0.0];
        for b in Basis::ALL {
            let s = &run.stats[b.index()];
            let i = b.index();
            phi_sweep.push(PhiPoint {
                phi,
                basis: b.to_string(),
                corrected: v[i] * (1.0 - 2.0 * s.corrected_rate()),
                perfect: v[i] * (1.0 - 2.0 * s.perfect_rate()),
            });
        }
    }
    let perfect_fraction = run.stats.iter().map(|s| s.perfect_fraction()).sum::<f64>() / 3.0;
    let section = InjectionSection { shots_per_basis: n as u64, raw, corrected, perfect, perfect_fraction, bases, phi_sweep };
    Ok((section, run))
}

/// Injection-only experiment.
pub fn run_injection(config: &ExperimentConfig) -> Result<Report> {
    let mut r = Report::new(config);
    r.injection = Some(injection_section(config)?.0);
    Ok(r)
}
