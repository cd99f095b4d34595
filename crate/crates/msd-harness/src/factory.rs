use msd_channel::{compose, ideal_channel, input_fidelity, learn_factory, Composed, Cut, LearnOptions, LogicalChannel};
use msd_codes::color_code;
use msd_decode::DecoderKind;
use msd_noisy::NoiseModel;

use crate::config::ExperimentConfig;
use crate::injection::{injection_section, mean_input, InjectionRun};
use crate::report::{AnglePoint, CurvePoint, Estimate, FactorySection, RescalePoint, Report};
use crate::{estimate, sub_seed, Result};

const LEARN: u64 = 0x6c65;
const POSTERIOR: u64 = 0x706f;
const SWEEP: u64 = 0x7377;

fn cut_label(c: &Cut) -> String {
    match c {
        Cut::All => "all".into(),
        Cut::Perfect => "perfect".into(),
        Cut::Score(t) => format!("score:{t}"),
        Cut::Fraction(q) => format!("fraction:{q}"),
    }
}

fn learn(config: &ExperimentConfig, noise: &NoiseModel, cuts: Vec<Cut>, seed: u64) -> Result<LogicalChannel> {
    let opts = LearnOptions {
        shots: config.shots_per_basis(),
        seed,
        decoder: config.decoder.into(),
        mld_samples: config.mld_samples,
        cuts,
    };
    Ok(learn_factory(&color_code(config.distance)?, noise, &opts)?)
}

/// Composed point with its interval from the counts of an equivalent
/// direct experiment; `None` when nothing is accepted.
fn point(c: &Composed, config: &ExperimentConfig, seed: u64) -> Result<Option<Estimate>> {
    if !c.fidelity.is_finite() || c.bases.iter().any(|b| b.kept_shots == 0 || b.acceptance <= 0.0) {
        return Ok(None);
    }
    let counts = c.effective_counts(config.shots_per_basis() as u64);
    Ok(Some(estimate(c.fidelity, &counts, config.posterior_samples, seed)?))
}

/// Rescale at which `distilled − injected` changes sign from positive
/// (low noise) to negative, by linear interpolation; points must be sorted
/// by rescale.
pub fn crossing(points: &[(f64, f64, f64)]) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (r0, d0) = (w[0].0, w[0].1 - w[0].2);
        let (r1, d1) = (w[1].0, w[1].1 - w[1].2);
        (d0 >= 0.0 && d1 < 0.0).then(|| r0 + (r1 - r0) * d0 / (d0 - d1))
    })
}

/// Learn the channel, compose it with the ideal factory and sweep.
/// `injected` is the error-corrected injection estimate to compare with.
pub fn factory_section(config: &ExperimentConfig, injected: Estimate) -> Result<FactorySection> {
    config.validate()?;
    let noise = config.noise.model();
    let mut cuts = vec![Cut::All];
    cuts.extend(config.sweep.thresholds.iter().map(|&t| Cut::Score(t)));
    cuts.extend(config.sweep.fractions.iter().map(|&q| Cut::Fraction(q)));
    cuts.push(Cut::Perfect);
    let channel = learn(config, &noise, cuts.clone(), sub_seed(config.seed, LEARN))?;
    let ideal = ideal_channel(&config.angles)?;

    let mut curve = Vec::new();
    let mut acceptance = f64::NAN;
    for (i, cut) in cuts.iter().enumerate() {
        let c = compose(&channel, i, &ideal)?;
        if i == 0 {
            acceptance = c.acceptance();
        }
        if let Some(e) = point(&c, config, sub_seed(config.seed, POSTERIOR + i as u64))? {
            curve.push(CurvePoint {
                cut: cut_label(cut),
                accepted_fraction: c.accepted_fraction(),
                acceptance: c.acceptance(),
                fidelity: e.fidelity,
                median: e.median,
                ci_lo: e.ci_lo,
                ci_hi: e.ci_hi,
            });
        }
    }
    curve.sort_by(|a, b| b.accepted_fraction.total_cmp(&a.accepted_fraction));

    let mut angle_sweep = Vec::new();
    for &theta in &config.sweep.thetas {
        let ideal = ideal_channel(&[theta; 5])?;
        let c = compose(&channel, 0, &ideal)?;
        angle_sweep.push(AnglePoint {
            theta,
            input_fidelity: input_fidelity(theta),
            ideal_fidelity: ideal.output_fidelity(),
            ideal_acceptance: ideal.acceptance(),
            fidelity: c.fidelity,
            acceptance: c.acceptance(),
        });
    }

    let mut rescale_sweep = Vec::new();
    let input = mean_input(&config.angles)?;
    for (k, &r) in config.sweep.rescales.iter().enumerate() {
        let seed = sub_seed(config.seed, SWEEP + k as u64);
        let noise = noise.with_rescale(r);
        let inj = InjectionRun::learn(config.distance, &noise, config.shots_per_basis(), seed)?;
        let injected = inj.corrected(input, config.posterior_samples, sub_seed(seed, 1))?;
        let ch = learn(config, &noise, vec![Cut::All, Cut::Perfect], sub_seed(seed, 2))?;
        let all = compose(&ch, 0, &ideal)?;
        let perfect = compose(&ch, 1, &ideal)?;
        let (Some(d), Some(p)) = (point(&all, config, sub_seed(seed, 3))?, point(&perfect, config, sub_seed(seed, 4))?)
        else {
            continue;
        };
        rescale_sweep.push(RescalePoint { rescale: r, injected, distilled: d, perfect: p, acceptance: all.acceptance() });
    }
    rescale_sweep.sort_by(|a, b| a.rescale.total_cmp(&b.rescale));
    let pts: Vec<_> = rescale_sweep.iter().map(|p| (p.rescale, p.distilled.fidelity, p.injected.fidelity)).collect();

    let (agree, shots) = channel.bases.iter().fold((0, 0), |(a, s), b| (a + b.stages_agree, s + b.shots));
    Ok(FactorySection {
        decoder: DecoderKind::from(config.decoder).to_string(),
        shots_per_basis: config.shots_per_basis() as u64,
        ideal_acceptance: ideal.acceptance(),
        ideal_fidelity: ideal.output_fidelity(),
        acceptance,
        stage_agreement: agree as f64 / shots.max(1) as f64,
        injected,
        curve,
        angle_sweep,
        rescale_sweep,
        crossing: crossing(&pts),
    })
}

/// Injection reference plus the full factory pipeline.
pub fn run_factory(config: &ExperimentConfig) -> Result<Report> {
    let (inj, _) = injection_section(config)?;
    let mut r = Report::new(config);
    r.factory = Some(factory_section(config, inj.corrected)?);
    r.injection = Some(inj);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_interpolates_the_sign_change() {
        let pts = [(0.4, 0.99, 0.98), (0.6, 0.985, 0.98), (0.8, 0.97, 0.975), (1.0, 0.96, 0.97)];
        let r = crossing(&pts).unwrap();
        // d goes 0.005 → −0.005 between 0.6 and 0.8
        assert!((r - 0.7).abs() < 1e-12);
        assert_eq!(crossing(&pts[2..]), None);
    }
}
