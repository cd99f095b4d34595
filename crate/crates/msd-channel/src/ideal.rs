use msd_noisy::distill::{accepted, distillation_layers, ANCILLA_MASK, OUTPUT, OUTPUT_BIT};
use msd_noisy::reference_layers;
use msd_pauli::{tableau_run, Basis, BlochVector, Circuit, DenseState, Expectation, Gate, Pauli, PauliString};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{ChannelError, Result};

pub(crate) fn pauli_of(b: Basis) -> Pauli {
    match b {
        Basis::X => Pauli::X,
        Basis::Y => Pauli::Y,
        Basis::Z => Pauli::Z,
    }
}

pub(crate) fn readout_bases(output: Basis) -> [Basis; 5] {
    let mut b = [Basis::Z; 5];
    b[OUTPUT] = output;
    b
}

/// Joint distribution of reading qubit q in `bases[q]`, indexed by the
/// outcome word (bit q set when qubit q reads −1). Built from the
/// expectations of all Pauli products over subsets of the qubits.
pub fn outcome_distribution(state: &DenseState, bases: &[Basis]) -> Result<Vec<f64>> {
    let n = bases.len();
    let size = 1usize << n;
    let mut corr = vec![0.0; size];
    for (s, c) in corr.iter_mut().enumerate() {
        let mut p = PauliString::identity(state.n());
        for (q, &b) in bases.iter().enumerate() {
            if s >> q & 1 == 1 {
                p.set(q, pauli_of(b))?;
            }
        }
        *c = state.expectation(&p)?.re;
    }
    Ok((0..size)
        .map(|w| {
            let sum: f64 = corr
                .iter()
                .enumerate()
                .map(|(s, &c)| if (w & s).count_ones() % 2 == 1 { -c } else { c })
                .sum();
            (sum / size as f64).max(0.0)
        })
        .collect())
}

/// Ideal outcome statistics with the output read in one basis.
#[derive(Clone, Debug, PartialEq)]
pub struct IdealBasis {
    pub basis: Basis,
    /// Probability of each 5-bit outcome word.
    pub joint: [f64; 32],
}

impl IdealBasis {
    pub fn acceptance(&self) -> f64 {
        (0..32).filter(|&w| accepted(w)).map(|w| self.joint[w as usize]).sum()
    }

    /// Output expectation conditioned on acceptance.
    pub fn output_expectation(&self) -> f64 {
        let mut e = 0.0;
        for w in (0..32u32).filter(|&w| accepted(w)) {
            let p = self.joint[w as usize];
            e += if w & OUTPUT_BIT == 0 { p } else { -p };
        }
        e / self.acceptance()
    }

    /// Probability of each 4-bit ancilla pattern (as a masked 5-bit word).
    pub fn syndrome_distribution(&self) -> [f64; 32] {
        let mut out = [0.0; 32];
        for (w, &p) in self.joint.iter().enumerate() {
            out[w & ANCILLA_MASK as usize] += p;
        }
        out
    }
}

/// The unencoded distillation circuit on five magic inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct IdealChannel {
    pub angles: [f64; 5],
    /// Indexed by [`Basis::index`].
    pub bases: [IdealBasis; 3],
}

impl IdealChannel {
    pub fn basis(&self, b: Basis) -> &IdealBasis {
        &self.bases[b.index()]
    }

    /// Acceptance does not depend on how the output is read.
    pub fn acceptance(&self) -> f64 {
        self.basis(Basis::Z).acceptance()
    }

    pub fn output_bloch(&self) -> BlochVector {
        let [x, y, z] = [0, 1, 2].map(|i| self.bases[i].output_expectation());
        BlochVector { x, y, z }
    }

    pub fn output_fidelity(&self) -> f64 {
        fidelity_of(&self.output_bloch())
    }
}

pub(crate) fn fidelity_of(v: &BlochVector) -> f64 {
    0.5 + (v.x + v.y + v.z) / (2.0 * 3f64.sqrt())
}

/// Five magic states, each followed by Rz(angle), through the distillation
/// layers.
pub fn ideal_state(angles: &[f64; 5]) -> Result<DenseState> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut s = DenseState::zero(5)?;
    for (q, &a) in angles.iter().enumerate() {
        s.apply(Gate::PrepMagic, &[q], &mut rng)?;
        if a != 0.0 {
            s.apply(Gate::Rz(a), &[q], &mut rng)?;
        }
    }
    for l in distillation_layers() {
        for op in &l.ops {
            s.apply(op.gate, op.qubits(), &mut rng)?;
        }
    }
    Ok(s)
}

pub fn ideal_channel(angles: &[f64; 5]) -> Result<IdealChannel> {
    let s = ideal_state(angles)?;
    let one = |b: Basis| -> Result<IdealBasis> {
        let d = outcome_distribution(&s, &readout_bases(b))?;
        let mut joint = [0.0; 32];
        joint.copy_from_slice(&d);
        Ok(IdealBasis { basis: b, joint })
    };
    Ok(IdealChannel { angles: *angles, bases: [one(Basis::X)?, one(Basis::Y)?, one(Basis::Z)?] })
}

/// Fidelity with the magic state of a magic state rotated by Rz(θ).
pub fn input_fidelity(theta: f64) -> f64 {
    0.5 + (2.0 * theta.cos() + 1.0) / 6.0
}

/// Error-free Clifford input on five qubits whose distillation readout
/// (ancillas in Z, output in `basis`) is deterministic.
pub fn reference_state_prep(basis: Basis) -> Result<Circuit> {
    let mut c = Circuit::new(5);
    for l in reference_layers(&[0, 1, 2, 3, 4], basis)? {
        c.push_layer(l)?;
    }
    Ok(c)
}

/// The deterministic outcome word of the reference input followed by the
/// distillation circuit, by stabilizer tableau.
pub fn reference_offset(basis: Basis) -> Result<u32> {
    let mut c = reference_state_prep(basis)?;
    for l in distillation_layers() {
        c.push_layer(l)?;
    }
    let t = tableau_run(&c, &mut ChaCha8Rng::seed_from_u64(0))?.tableau;
    let mut word = 0;
    for (q, b) in readout_bases(basis).into_iter().enumerate() {
        match t.expectation(&PauliString::single(5, q, pauli_of(b))?)? {
            Expectation::Plus => {}
            Expectation::Minus => word |= 1 << q,
            Expectation::Random => return Err(ChannelError::NotDeterministic),
        }
    }
    Ok(word)
}
