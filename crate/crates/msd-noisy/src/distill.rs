//! The 5-to-1 distillation circuit on logical qubits 0..5.
//!
//! Qubit 1 carries the output; qubits 0, 2, 3, 4 are measured in Z and the
//! run is accepted when they read 1, 0, 1, 1.

use msd_pauli::{Basis, Circuit, Gate, Layer, Op};

pub const OUTPUT: usize = 1;
pub const ANCILLAS: [usize; 4] = [0, 2, 3, 4];
/// Bit q of a 5-bit word is the outcome of logical qubit q.
pub const ANCILLA_MASK: u32 = 0b11101;
pub const ACCEPT_WORD: u32 = 0b11001;
pub const OUTPUT_BIT: u32 = 1 << OUTPUT;

pub fn accepted(word: u32) -> bool {
    word & ANCILLA_MASK == ACCEPT_WORD
}

/// Three CZ rounds separated by local rotations.
pub fn distillation_layers() -> Vec<Layer> {
    use Gate::*;
    let one = |ops: &[(Gate, usize)]| Layer::new(ops.iter().map(|&(g, q)| Op::one(g, q)).collect());
    let cz = |pairs: &[(usize, usize)]| {
        let mut l = Layer::new(pairs.iter().map(|&(a, b)| Op::two(CZ, a, b)).collect());
        l.moves = pairs.iter().map(|p| p.1).collect();
        l
    };
    vec![
        one(&[(SqrtYDag, 1)]),
        cz(&[(0, 4), (2, 3)]),
        one(&[(SqrtYDag, 0), (SqrtXDag, 1), (SqrtX, 2), (SqrtX, 4)]),
        cz(&[(0, 3), (1, 2)]),
        one(&[(SqrtX, 1), (SqrtY, 3), (SqrtX, 4)]),
        cz(&[(0, 1), (2, 4)]),
        one(&[(SqrtXDag, 0), (SqrtYDag, 2), (SqrtX, 4)]),
    ]
}

/// Unencoded five-qubit circuit (no preparation), ancillas read in Z and the
/// output in `basis`; measurement k is qubit k.
pub fn distillation_circuit(basis: Basis) -> Circuit {
    let mut c = Circuit::new(5);
    for l in distillation_layers() {
        c.push_layer(l).expect("static circuit");
    }
    let m = (0..5).map(|q| Op::one(Gate::measure(if q == OUTPUT { basis } else { Basis::Z }), q)).collect();
    c.push_layer(Layer::new(m)).expect("static circuit");
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use msd_pauli::{BlochVector, DenseState};
    use num_complex::Complex64;

    fn magic_inputs() -> DenseState {
        let m = BlochVector::magic();
        let theta = m.z.acos();
        let phi = std::f64::consts::FRAC_PI_4;
        let amp = [Complex64::new((theta / 2.0).cos(), 0.0), Complex64::from_polar((theta / 2.0).sin(), phi)];
        DenseState::product(&[amp; 5]).unwrap()
    }

    #[test]
    fn perfect_inputs_accept_one_sixth_with_magic_output() {
        let mut st = magic_inputs();
        for l in distillation_layers() {
            for op in &l.ops {
                st.apply(op.gate, op.qubits(), &mut rand::rng()).unwrap();
            }
        }
        let mut p_acc = 0.0;
        for (i, a) in st.amplitudes().iter().enumerate() {
            if accepted(i as u32 & ANCILLA_MASK) {
                p_acc += a.norm_sqr();
            }
        }
        assert!((p_acc - 1.0 / 6.0).abs() < 1e-12);
        // project onto the accept pattern and read the output
        for (q, bit) in [(0, true), (2, false), (3, true), (4, true)] {
            st.project(q, Basis::Z, bit).unwrap();
        }
        let b = st.bloch(OUTPUT).unwrap();
        let m = BlochVector::magic();
        assert!((b.x - m.x).abs() < 1e-9 && (b.y - m.y).abs() < 1e-9 && (b.z - m.z).abs() < 1e-9);
    }

    #[test]
    fn three_cz_rounds() {
        let c = distillation_circuit(Basis::Z);
        assert_eq!(c.entangling_layers(), 3);
        assert_eq!(c.count_gate(|g| g == Gate::CZ), 6);
        assert_eq!(c.num_measurements(), 5);
    }
}
