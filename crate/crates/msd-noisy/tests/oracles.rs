use std::time::Instant;

use msd_codes::{color_code, support, trivial_code, CssCode};
use msd_noisy::distill::distillation_layers;
use msd_noisy::*;
use msd_pauli::{Basis, Circuit, Gate, LayerTag, Pauli, PauliString};

/// Push one fault through the circuit with full signed Pauli algebra.
fn single_fault_column(c: &Circuit, f: &Fault) -> (u128, u32) {
    let mut p = PauliString::from_sparse(c.n_qubits, &f.paulis).unwrap();
    let mut flips = Vec::new();
    for (t, layer) in c.layers.iter().enumerate() {
        for op in &layer.ops {
            let q = op.qubits();
            match op.gate {
                g if g.measure_basis().is_some() => {
                    let flipped = t >= f.time && {
                        let b = g.measure_basis().unwrap();
                        let (x, z) = (p.x_bit(q[0]), p.z_bit(q[0]));
                        match b {
                            Basis::Z => x,
                            Basis::X => z,
                            Basis::Y => x ^ z,
                        }
                    };
                    flips.push(flipped);
                }
                _ if t < f.time || layer.tag != LayerTag::Normal => {}
                Gate::PrepZ => p.set(q[0], Pauli::I).unwrap(),
                g => p.apply(g, q).unwrap(),
            }
        }
    }
    let par = |idx: &Vec<usize>| idx.iter().fold(false, |a, &m| a ^ flips[m]);
    let d = c.detectors.iter().enumerate().fold(0u128, |m, (i, v)| m | (par(v) as u128) << i);
    let o = c.observables.iter().enumerate().fold(0u32, |m, (i, v)| m | (par(v) as u32) << i);
    (d, o)
}

#[test]
fn every_mechanism_matches_single_fault_propagation() {
    for basis in Basis::ALL {
        let (c, _) = build_reference_factory(&color_code(3).unwrap(), basis).unwrap();
        let model = instrument(&c, &NoiseModel::default()).unwrap();
        for m in &model.mechanisms {
            for &j in &m.sources {
                assert_eq!(single_fault_column(&c, &model.faults[j]), (m.detectors, m.observables));
            }
        }
        for &j in &model.benign {
            assert_eq!(single_fault_column(&c, &model.faults[j]), (0, 0));
        }
        // merged probabilities combine by odd parity
        for m in &model.mechanisms {
            let odd = m.sources.iter().fold(0.0, |a: f64, &j| {
                let p = model.faults[j].p;
                a * (1.0 - p) + p * (1.0 - a)
            });
            assert!((odd - m.p).abs() < 1e-15);
        }
    }
}

fn means(recs: &[ShotRecord], k: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    for r in recs {
        for (i, x) in v.iter_mut().enumerate() {
            if r.detectors >> i & 1 == 1 {
                *x += 1.0;
            }
        }
    }
    v.iter().map(|x| x / recs.len() as f64).collect()
}

fn obs_means(recs: &[ShotRecord], k: usize) -> Vec<f64> {
    (0..k).map(|i| recs.iter().filter(|r| r.observables >> i & 1 == 1).count() as f64 / recs.len() as f64).collect()
}

/// Two-sample agreement within 3σ per coordinate.
fn agree(a: &[f64], b: &[f64], n: f64) {
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let pooled = (x + y) / 2.0;
        let sigma = (2.0 * pooled * (1.0 - pooled) / n).sqrt().max(1e-12);
        assert!((x - y).abs() < 3.0 * sigma + 1e-12, "index {i}: {x} vs {y} (σ {sigma})");
    }
}

#[test]
fn frame_simulation_matches_model_sampling() {
    let shots = 1_000_000;
    let t = Instant::now();
    let (c, layout) = build_reference_factory(&color_code(3).unwrap(), Basis::Z).unwrap();
    let nm = NoiseModel::default();
    let model = instrument(&c, &nm).unwrap();
    let a = sample(&model, shots, 11);
    let b = frame_sample(&c, &nm, shots, 12).unwrap();
    agree(&means(&a, layout.num_detectors()), &means(&b, layout.num_detectors()), shots as f64);
    agree(&obs_means(&a, 5), &obs_means(&b, 5), shots as f64);
    assert!(t.elapsed().as_secs() < 120);
}

#[test]
fn exact_means_match_samples_and_first_order_sums() {
    let (c, _) = build_reference_factory(&color_code(3).unwrap(), Basis::X).unwrap();
    let model = instrument(&c, &NoiseModel::default().with_rescale(0.1)).unwrap();
    let shots = 1_000_000;
    let s = means(&sample(&model, shots, 5), 15);
    let exact = model.detector_means();
    let lin = model.linearized_detector_means();
    for i in 0..15 {
        let sigma = (exact[i] * (1.0 - exact[i]) / shots as f64).sqrt();
        assert!((s[i] - exact[i]).abs() < 3.5 * sigma, "detector {i}");
        // at this scale the first-order sum is within a few percent
        assert!((lin[i] - exact[i]).abs() < 0.05 * exact[i], "detector {i}");
    }
}

#[test]
fn unmerged_faults_give_the_same_statistics() {
    let (c, _) = build_reference_factory(&color_code(3).unwrap(), Basis::Y).unwrap();
    let model = instrument(&c, &NoiseModel::default()).unwrap();
    let mut split = model.clone();
    split.mechanisms = model
        .mechanisms
        .iter()
        .flat_map(|m| {
            m.sources.iter().map(|&j| Mechanism {
                p: model.faults[j].p,
                detectors: m.detectors,
                observables: m.observables,
                sources: vec![j],
            })
        })
        .collect();
    let shots = 500_000;
    agree(&means(&sample(&model, shots, 1), 15), &means(&sample(&split, shots, 2), 15), shots as f64);
}

#[test]
fn zero_noise_frames_are_silent() {
    let (c, _) = build_reference_factory(&color_code(3).unwrap(), Basis::Z).unwrap();
    let recs = frame_sample(&c, &NoiseModel::noiseless(), 1000, 0).unwrap();
    assert!(recs.iter().all(|r| *r == ShotRecord::default()));
}

/// Encoded image of a 5-qubit logical Pauli (X̄, Z̄ on the logical support,
/// Ȳ = iX̄Z̄).
fn encode(code: &CssCode, p: &PauliString) -> PauliString {
    let n = code.n;
    let mut out = PauliString::identity(5 * n);
    for b in 0..5 {
        let on = |m: u64, pa| {
            PauliString::on_support(5 * n, support(m).into_iter().map(|q| b * n + q), pa).unwrap()
        };
        let lx = on(code.logical_x[0], Pauli::X);
        let lz = on(code.logical_z[0], Pauli::Z);
        match p.get(b) {
            Pauli::I => {}
            Pauli::X => out.mul_assign(&lx).unwrap(),
            Pauli::Z => out.mul_assign(&lz).unwrap(),
            Pauli::Y => {
                let mut y = lx.mul(&lz).unwrap();
                y.set_phase((y.phase() + 1) & 3);
                out.mul_assign(&y).unwrap();
            }
        }
    }
    out.set_phase((out.phase() + p.phase()) & 3);
    out
}

#[test]
fn transversal_layers_implement_the_logical_circuit() {
    for code in [trivial_code(), color_code(3).unwrap(), color_code(5).unwrap()] {
        let (c, _) = build_factory_circuit(&code, &[0.0; 5], Basis::Z).unwrap();
        let k = c.layers.len();
        let transversal = &c.layers[k - 8..k - 1];
        for b in 0..5 {
            for pa in [Pauli::X, Pauli::Z] {
                let logical = PauliString::single(5, b, pa).unwrap();
                let mut want = logical.clone();
                for l in distillation_layers() {
                    for op in &l.ops {
                        want.apply(op.gate, op.qubits()).unwrap();
                    }
                }
                let mut got = encode(&code, &logical);
                for l in transversal {
                    for op in &l.ops {
                        got.apply(op.gate, op.qubits()).unwrap();
                    }
                }
                assert_eq!(got, encode(&code, &want), "n={} {pa:?}{b}", code.n);
            }
        }
    }
}
