//! The ten end-to-end acceptance criteria. Each prints one PASS/FAIL line;
//! run with `--nocapture` to see them.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use msd_channel::{bayes_interval, ideal_channel, input_fidelity, magic_fidelity, BasisCounts};
use msd_codes::color_code;
use msd_decode::MleSolver;
use msd_harness::{run_factory, run_injection, Decoder, ExperimentConfig, Report};
use msd_noisy::{build_reference_factory, frame_sample, instrument, sample, DetectorModel, Mechanism, NoiseModel, ShotRecord};
use msd_pauli::{Basis, BlochVector, Gate};
use msd_synth::{circuit_from_rops, derive_column_ops, reduce, verify_injection, InjectedInput, ReductionMatrix, RowOpSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn within(t: &Instant, limit: f64, detail: String) -> Outcome {
    let s = t.elapsed().as_secs_f64();
    ensure(s < limit, format!("{detail}; {s:.1} s (limit {limit} s)"))
}

fn uniform(theta: f64) -> msd_channel::IdealChannel {
    ideal_channel(&[theta; 5]).unwrap()
}

fn noiseless_factory() -> Outcome {
    let t = Instant::now();
    let c = ideal_channel(&[0.0; 5]).unwrap();
    let (a, f) = (c.acceptance(), c.output_fidelity());
    ensure((a - 1.0 / 6.0).abs() < 1e-9 && (f - 1.0).abs() < 1e-9, format!("acceptance {a:.12}, F {f:.12}"))?;
    within(&t, 1.0, format!("acceptance {a:.12}, F {f:.12}"))
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn quadratic_suppression() -> Outcome {
    let t = Instant::now();
    let thetas: Vec<f64> = (1..=5).map(|k| 0.02 * k as f64 * PI).collect();
    let x: Vec<f64> = thetas.iter().map(|&th| (1.0 - input_fidelity(th)).ln()).collect();
    let y: Vec<f64> = thetas.iter().map(|&th| (1.0 - uniform(th).output_fidelity()).ln()).collect();
    let s = slope(&x, &y);
    ensure((s - 2.0).abs() <= 0.1, format!("log-log slope {s:.4}"))?;
    within(&t, 10.0, format!("log-log slope {s:.4}"))
}

fn coherent_probe() -> Outcome {
    let t = Instant::now();
    let probes = [0.16 * PI, 0.24 * PI, 0.32 * PI];
    let mut last = uniform(0.0).acceptance();
    let mut notes = Vec::new();
    for &th in &probes {
        let c = uniform(th);
        let (fo, fi, a) = (c.output_fidelity(), input_fidelity(th), c.acceptance());
        ensure(fo > fi, format!("no gain at θ = {:.2}π: {fo:.5} vs {fi:.5}", th / PI))?;
        ensure(a < last, format!("acceptance not decreasing at θ = {:.2}π", th / PI))?;
        notes.push(format!("{:.2}π: F {fi:.4}→{fo:.4}, acc {a:.4}", th / PI));
        last = a;
    }
    // first-order linearity: the secant from θ = 0 to the first probe,
    // against the slope at θ → 0, both per unit input infidelity
    let a0 = 1.0 / 6.0;
    let h = 1e-3 * PI;
    let d0 = (a0 - uniform(h).acceptance()) / (1.0 - input_fidelity(h));
    let secant = (a0 - uniform(probes[0]).acceptance()) / (1.0 - input_fidelity(probes[0]));
    let rel = (secant / d0 - 1.0).abs();
    notes.push(format!("secant/slope − 1 = {rel:.4}"));
    ensure(rel < 0.1, notes.join("; "))?;
    within(&t, 10.0, notes.join("; "))
}

fn known(code_d: usize, text: &str, ops: usize, layers: usize) -> Result<(), String> {
    let code = color_code(code_d).unwrap();
    let seq = RowOpSequence::parse(text).map_err(|e| e.to_string())?;
    if seq.len() != ops {
        return Err(format!("d={code_d}: {} ops", seq.len()));
    }
    let mut fin = seq.replay(&ReductionMatrix::from_code(&code).unwrap()).map_err(|e| e.to_string())?;
    for c in derive_column_ops(&fin).ok_or(format!("d={code_d}: not a valid reduction"))? {
        fin.apply_column_op(c).unwrap();
    }
    if !fin.is_final() {
        return Err(format!("d={code_d}: not reduced"));
    }
    let c = circuit_from_rops(&seq, &fin, InjectedInput::Magic { theta: 0.0 }).map_err(|e| e.to_string())?;
    if c.entangling_layers() != layers || c.count_gate(|g| g == Gate::CZ) != ops {
        return Err(format!("d={code_d}: {} layers, {} CZ", c.entangling_layers(), c.count_gate(|g| g == Gate::CZ)));
    }
    verify_injection(&c, &code).map_err(|e| e.to_string())?;
    Ok(())
}

fn synthesis_golden() -> Outcome {
    let t = Instant::now();
    let code = color_code(3).unwrap();
    let r = reduce(&code).map_err(|e| e.to_string())?;
    let c = circuit_from_rops(&r.ops, &r.final_matrix, InjectedInput::Magic { theta: 0.0 }).map_err(|e| e.to_string())?;
    let (gates, layers) = (c.count_gate(|g| g == Gate::CZ), c.entangling_layers());
    ensure(gates == 9 && layers == 3, format!("search found {gates} gates in {layers} layers"))?;
    verify_injection(&c, &code).map_err(|e| e.to_string())?;
    known(3, "0->1, 3->2, 5->4, 0->3, 2->5, 4->6, 2->1, 4->3, 6->5", 9, 3)?;
    known(
        5,
        "1->0, 3->2, 4->5, 7->6, 9->8, 15->12, 2->0, 6->3, 8->5, 12->10, 13->11, 2->4, 8->6, \
         9->7, 10->13, 16->14, 4->7, 8->10, 14->11, 15->16, 3->1, 7->10, 14->12, 16->13",
        24,
        5,
    )?;
    within(&t, 5.0, "d=3 search 9 gates/3 layers; known d=3 (9, 3) and d=5 (24, 5) sequences verify".into())
}

fn random_model(rng: &mut ChaCha8Rng) -> DetectorModel {
    let k = rng.random_range(1..=10usize);
    let l = rng.random_range(0..=3usize);
    let m = rng.random_range(1..=20usize);
    let rates = [0.001, 0.01, 0.05, 0.2];
    let mechanisms = (0..m)
        .map(|_| Mechanism {
            p: if rng.random_bool(0.5) { rates[rng.random_range(0..4)] } else { 10f64.powf(rng.random_range(-4.0..-0.4)) },
            detectors: rng.random_range(1..1u128 << k),
            observables: rng.random_range(0..1u32 << l),
            sources: vec![],
        })
        .collect();
    DetectorModel { num_detectors: k, num_observables: l, mechanisms, faults: vec![], benign: vec![] }
}

/// Lightest total weight over all 2^m subsets matching the syndrome, by a
/// Gray-code walk.
fn enumerate(model: &DetectorModel, syndrome: u128) -> Option<f64> {
    let m = model.mechanisms.len();
    let w: Vec<f64> = model.mechanisms.iter().map(|x| ((1.0 - x.p) / x.p).ln()).collect();
    let (mut s, mut weight, mut best) = (0u128, 0.0f64, None::<f64>);
    let mut inside = vec![false; m];
    for step in 0u32..1 << m {
        if step > 0 {
            let i = step.trailing_zeros() as usize;
            s ^= model.mechanisms[i].detectors;
            inside[i] = !inside[i];
            weight = (0..m).filter(|&k| inside[k]).map(|k| w[k]).sum();
        }
        if s == syndrome && best.is_none_or(|b| weight < b) {
            best = Some(weight);
        }
    }
    best
}

fn decoder_exactness() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let model = random_model(&mut rng);
        let syndrome = if rng.random_bool(0.9) {
            model.mechanisms.iter().filter(|_| rng.random_bool(0.3)).fold(0, |s, m| s ^ m.detectors)
        } else {
            rng.random_range(0..1u128 << model.num_detectors)
        };
        let solver = MleSolver::new(&model, model.detector_mask(), u32::MAX).unwrap();
        match (solver.solve(syndrome), enumerate(&model, syndrome)) {
            (Ok(sol), Some(w)) if (sol.weight - w).abs() < 1e-9 => {}
            (Err(_), None) => {}
            _ => mismatches += 1,
        }
    }
    ensure(mismatches == 0, format!("{mismatches} mismatches in 1000 instances"))?;
    within(&t, 60.0, "0 mismatches in 1000 instances".into())
}

fn base_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig::with_seed(seed)
}

fn decoder_agreement() -> Outcome {
    let t = Instant::now();
    let run = |d: Decoder| -> Report {
        let mut c = base_config(61);
        c.decoder = d;
        c.shots = 1_000_000;
        c.mld_samples = 10_000_000;
        c.sweep.fractions = vec![1.0, 0.8, 0.6, 0.4, 0.3, 0.2, 0.1, 0.05];
        c.sweep.phi_points = 0;
        run_factory(&c).unwrap()
    };
    let (a, b) = (run(Decoder::Mle), run(Decoder::Mld));
    let (ca, cb) = (&a.factory.as_ref().unwrap().curve, &b.factory.as_ref().unwrap().curve);
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for p in ca {
        let Some(q) = cb.iter().find(|q| q.cut == p.cut) else {
            bad.push(format!("{} missing for MLD", p.cut));
            continue;
        };
        let sigma = ((p.ci_hi - p.ci_lo).powi(2) / 4.0 + (q.ci_hi - q.ci_lo).powi(2) / 4.0).sqrt();
        let z = (p.fidelity - q.fidelity).abs() / sigma;
        worst = worst.max(z);
        if z > 2.0 {
            bad.push(format!("{}: MLE {:.5} MLD {:.5} (σ {sigma:.5})", p.cut, p.fidelity, q.fidelity));
        }
    }
    let msg = format!("{} points, worst |ΔF|/σ = {worst:.2}", ca.len());
    ensure(bad.is_empty() && ca.len() == cb.len(), format!("{msg}; {}", bad.join("; ")))?;
    within(&t, 600.0, msg)
}

fn fidelity_bands() -> Outcome {
    let t = Instant::now();
    let mut c = base_config(71);
    c.noise.rescale = 1.25;
    c.shots = 3_000_000;
    c.sweep.fractions = vec![];
    c.sweep.phi_points = 0;
    let r = run_factory(&c).unwrap();
    let inj = r.injection.as_ref().unwrap().corrected.fidelity;
    let f = r.factory.as_ref().unwrap();
    let perfect = f.curve.iter().find(|p| p.cut == "perfect").unwrap().fidelity;
    let msg = format!("injected EC F {inj:.5}, perfect-stabilizer distilled F {perfect:.5}");
    ensure((0.94..=0.96).contains(&inj) && perfect > inj, msg.clone())?;
    within(&t, 600.0, msg)
}

fn rescale_study() -> Outcome {
    let t = Instant::now();
    let mut c = base_config(81);
    c.shots = 3_000_000;
    c.sweep.fractions = vec![];
    c.sweep.phi_points = 0;
    c.sweep.rescales = vec![0.4, 0.6, 0.8, 1.0, 1.25];
    let r = injection_free(run_factory(&c).unwrap());
    let f = r.factory.unwrap();
    let pts: Vec<String> = f
        .rescale_sweep
        .iter()
        .map(|p| format!("{}: {:.4}/{:.4}", p.rescale, p.distilled.fidelity, p.injected.fidelity))
        .collect();
    let target = 1.25 / 2.0;
    let msg = format!("distilled/injected {}; crossing {:?} (target {target})", pts.join(", "), f.crossing);
    let ok = f.rescale_sweep.len() == 5 && f.crossing.is_some_and(|x| (x - target).abs() <= 0.2);
    ensure(ok, msg.clone())?;
    within(&t, 900.0, msg)
}

fn injection_free(mut r: Report) -> Report {
    r.injection = None;
    r
}

fn detector_means(recs: &[ShotRecord], k: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    for r in recs {
        for (i, x) in v.iter_mut().enumerate() {
            *x += (r.detectors >> i & 1) as f64;
        }
    }
    v.iter().map(|x| x / recs.len() as f64).collect()
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let shots = 1_000_000;
    let code = color_code(3).unwrap();
    let noise = NoiseModel::default();
    let mut worst = 0.0f64;
    let mut compared = 0;
    for b in Basis::ALL {
        let (c, layout) = build_reference_factory(&code, b).unwrap();
        let model = instrument(&c, &noise).unwrap();
        let k = layout.num_detectors();
        let x = detector_means(&sample(&model, shots, 900 + b.index() as u64), k);
        let y = detector_means(&frame_sample(&c, &noise, shots, 910 + b.index() as u64).unwrap(), k);
        for (i, (p, q)) in x.iter().zip(&y).enumerate() {
            let pooled = (p + q) / 2.0;
            let sigma = (2.0 * pooled * (1.0 - pooled) / shots as f64).sqrt();
            let z = (p - q).abs() / sigma;
            worst = worst.max(z);
            compared += 1;
            ensure(z <= 3.0, format!("{b} detector {i}: {p:.6} vs {q:.6} ({z:.2}σ)"))?;
        }
    }
    within(&t, 120.0, format!("{compared} detector means, worst {worst:.2}σ"))
}

fn uniform_ball(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [0; 3].map(|_| rng.random::<f64>() * 2.0 - 1.0);
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return v;
        }
    }
}

fn bayes_calibration() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let datasets = 500;
    let mut covered = 0;
    for k in 0..datasets {
        let v = uniform_ball(&mut rng);
        let counts = v.map(|x| BasisCounts { shots: 300, plus: Binomial::new(300, (1.0 + x) / 2.0).unwrap().sample(&mut rng) });
        let truth = magic_fidelity(&BlochVector::new(v[0], v[1], v[2]).unwrap()).unwrap();
        let i = bayes_interval(&counts, 100_000, 5000 + k).unwrap();
        covered += (i.lo <= truth && truth <= i.hi) as usize;
    }
    let rate = covered as f64 / datasets as f64;
    let msg = format!("coverage {rate:.3} over {datasets} datasets");
    ensure((rate - 0.68).abs() <= 0.05, msg.clone())?;
    within(&t, 300.0, msg)
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("noiseless factory", noiseless_factory),
        ("quadratic suppression", quadratic_suppression),
        ("coherent-error probe", coherent_probe),
        ("synthesis golden tests", synthesis_golden),
        ("decoder exactness", decoder_exactness),
        ("decoder agreement", decoder_agreement),
        ("end-to-end fidelity bands", fidelity_bands),
        ("rescale study", rescale_study),
        ("oracle equivalence", oracle_equivalence),
        ("Bayesian calibration", bayes_calibration),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match r {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg}", i + 1),
            Err(msg) => {
                println!("criterion {:>2} FAIL  {name}: {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn injection_only_run_matches_the_factory_reference() {
    // the factory's injected reference is the injection run itself
    let mut c = base_config(5);
    c.shots = 30_000;
    c.sweep.phi_points = 0;
    let i = run_injection(&c).unwrap().injection.unwrap();
    let f = run_factory(&c).unwrap().factory.unwrap();
    assert_eq!(i.corrected, f.injected);
}
