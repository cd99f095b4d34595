use std::time::Instant;

use msd_codes::{color_code, CssCode};
use msd_pauli::{dense_run, DenseState, Gate, Layer, Op};
use msd_synth::*;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn d5_search_finds_a_five_layer_encoder() {
    let code = color_code(5).unwrap();
    let t = Instant::now();
    let r = reduce(&code).unwrap();
    assert!(t.elapsed().as_secs_f64() < 5.0);
    assert_eq!(r.ops.depth(), 5);
    let c = circuit_from_rops(&r.ops, &r.final_matrix, InjectedInput::Zero).unwrap();
    assert_eq!(c.entangling_layers(), 5);
    verify_injection(&c, &code).unwrap();
}

#[test]
fn d3_order_matches_exhaustive_oracle() {
    let code = color_code(3).unwrap();
    let r = reduce(&code).unwrap();
    let c = circuit_from_rops(&r.ops, &r.final_matrix, InjectedInput::Zero).unwrap();
    let layers = c.cz_layers();
    let found = search_order(&layers, 7).expect("a valid order exists");
    assert!(check_order(&layers, &found));
    // oracle: every permutation of 7, Heap's algorithm
    let mut p: Vec<usize> = (0..7).collect();
    let mut cnt = [0; 7];
    let mut any_valid = check_order(&layers, &p);
    let mut i = 0;
    while i < 7 {
        if cnt[i] < i {
            if i % 2 == 0 { p.swap(0, i) } else { p.swap(cnt[i], i) }
            any_valid |= check_order(&layers, &p);
            cnt[i] += 1;
            i = 0;
        } else {
            cnt[i] = 0;
            i += 1;
        }
    }
    assert!(any_valid);
}

#[test]
fn published_d3_encoder_is_valid_with_its_own_labels() {
    let code = color_code(3).unwrap();
    let seq = RowOpSequence::parse("0->1, 3->2, 5->4, 0->3, 2->5, 4->6, 2->1, 4->3, 6->5").unwrap();
    let mut fin = seq.replay(&ReductionMatrix::from_code(&code).unwrap()).unwrap();
    for op in derive_column_ops(&fin).unwrap() {
        fin.apply_column_op(op).unwrap();
    }
    let c = circuit_from_rops(&seq, &fin, InjectedInput::Zero).unwrap();
    assert!(check_order(&c.cz_layers(), &(0..7).collect::<Vec<_>>()));
}

/// A d=3 patch with qubits relabelled, checks recombined by an invertible
/// map, and the logical dressed by checks — still self-dual.
fn scrambled_d3(perm_seed: Vec<usize>, mix: [u8; 3], dress: u8) -> Option<CssCode> {
    let base = color_code(3).unwrap();
    let mut perm: Vec<usize> = (0..7).collect();
    for (i, &k) in perm_seed.iter().enumerate() {
        perm.swap(i, i + k % (7 - i));
    }
    let relabel = |m: u64| (0..7).filter(|&q| m >> q & 1 == 1).fold(0u64, |a, q| a | 1 << perm[q]);
    let checks: Vec<u64> = mix
        .iter()
        .map(|&row| (0..3).filter(|j| row >> j & 1 == 1).fold(0, |a, j| a ^ base.z_checks[j]))
        .collect();
    if msd_codes::gf2::rank(&checks) != 3 {
        return None;
    }
    let checks: Vec<u64> = checks.into_iter().map(relabel).collect();
    let dressing = (0..3).filter(|j| dress >> j & 1 == 1).fold(0, |a, j| a ^ base.z_checks[j]);
    let logical = relabel(base.logical_z[0] ^ dressing);
    Some(CssCode {
        label: "scrambled".into(),
        n: 7,
        k: 1,
        d: 3,
        x_checks: checks.clone(),
        z_checks: checks,
        logical_x: vec![logical],
        logical_z: vec![logical],
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduce_then_encode_always_verifies(
        perm in proptest::collection::vec(0usize..7, 6),
        mix in proptest::array::uniform3(1u8..8),
        dress in 0u8..8,
    ) {
        let Some(code) = scrambled_d3(perm, mix, dress) else { return Ok(()) };
        prop_assert!(msd_codes::validate_code(&code).is_ok());
        let r = reduce(&code).unwrap();
        let c = circuit_from_rops(&r.ops, &r.final_matrix, InjectedInput::Zero).unwrap();
        prop_assert!(verify_injection(&c, &code).is_ok());
        for l in &c.layers {
            let mut qs: Vec<usize> = l.qubits().collect();
            qs.sort_unstable();
            prop_assert!(qs.windows(2).all(|w| w[0] != w[1]));
        }
    }

    /// The merged-rotation circuit equals the textbook CNOT encoder.
    #[test]
    fn rotation_merging_preserves_the_state(theta in -3.2f64..3.2, which in 0usize..2) {
        let code = color_code(3).unwrap();
        let (seq, fin) = if which == 0 {
            let r = reduce(&code).unwrap();
            (r.ops, r.final_matrix)
        } else {
            let seq = RowOpSequence::parse("0->1, 3->2, 5->4, 0->3, 2->5, 4->6, 2->1, 4->3, 6->5").unwrap();
            let mut fin = seq.replay(&ReductionMatrix::from_code(&code).unwrap()).unwrap();
            for op in derive_column_ops(&fin).unwrap() { fin.apply_column_op(op).unwrap(); }
            (seq, fin)
        };
        let input = InjectedInput::Magic { theta };
        let merged = circuit_from_rops(&seq, &fin, input).unwrap();

        let host = fin.host(fin.n_checks()).unwrap();
        let mut naive = msd_pauli::Circuit::new(7);
        naive.roles = merged.roles.clone();
        for l in input.layers(host) { naive.push_layer(l).unwrap(); }
        for q in (0..7).filter(|&q| q != host) {
            naive.push_layer(Layer::new(vec![Op::one(Gate::PrepZ, q)])).unwrap();
        }
        for c in 0..fin.n_checks() {
            naive.push_layer(Layer::new(vec![Op::one(Gate::SqrtY, fin.host(c).unwrap())])).unwrap();
        }
        for op in seq.ops().iter().rev() {
            naive.push_layer(Layer::new(vec![Op::two(Gate::CNOT, op.source, op.target)])).unwrap();
        }
        let mut rng = StdRng::seed_from_u64(0);
        let a = dense_run(&merged, DenseState::zero(7).unwrap(), &mut rng).unwrap().state;
        let b = dense_run(&naive, DenseState::zero(7).unwrap(), &mut rng).unwrap().state;
        let overlap: num_complex::Complex64 =
            a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x.conj() * y).sum();
        prop_assert!((overlap.norm() - 1.0).abs() < 1e-9);
        prop_assert!((overlap - 1.0).norm() < 1e-9, "global phase differs: {overlap}");
    }
}
