use msd_pauli::{Basis, Circuit, Gate, LayerTag, Pauli};

use crate::{NoisyError, Result};

/// Circuit-level Pauli noise. All rates are multiplied by `rescale`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub p_cz: f64,
    /// Share of `p_cz` spread over ZI, IZ and ZZ.
    pub bias_zz: f64,
    pub p_1q_global: f64,
    pub p_1q_local: f64,
    pub p_prep: f64,
    pub p_meas: f64,
    pub p_move_z: f64,
    pub p_idle: f64,
    pub rescale: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            p_cz: 0.0058,
            bias_zz: 0.6,
            p_1q_global: 2.2e-4,
            p_1q_local: 1.9e-3,
            p_prep: 0.005,
            p_meas: 0.005,
            p_move_z: 2e-4,
            p_idle: 1e-4,
            rescale: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaultKind {
    Prep,
    Injected,
    Gate1q,
    Gate2q,
    Move,
    Idle,
    Measure,
}

/// One elementary error mechanism: `paulis` applied just before layer
/// `time` (time = layer count means after the last layer).
#[derive(Clone, Debug, PartialEq)]
pub struct Fault {
    pub time: usize,
    pub kind: FaultKind,
    pub paulis: Vec<(usize, Pauli)>,
    pub p: f64,
}

const PAULIS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

impl NoiseModel {
    pub fn noiseless() -> NoiseModel {
        NoiseModel {
            p_cz: 0.0,
            p_1q_global: 0.0,
            p_1q_local: 0.0,
            p_prep: 0.0,
            p_meas: 0.0,
            p_move_z: 0.0,
            p_idle: 0.0,
            ..Default::default()
        }
    }

    pub fn with_rescale(mut self, rescale: f64) -> NoiseModel {
        self.rescale = rescale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rescale > 0.0 && self.rescale.is_finite()) {
            return Err(NoisyError::InvalidNoise(format!("rescale must be positive, got {}", self.rescale)));
        }
        if !(0.0..=1.0).contains(&self.bias_zz) {
            return Err(NoisyError::InvalidNoise(format!("bias_zz must lie in [0, 1], got {}", self.bias_zz)));
        }
        let rates = [
            ("p_cz", self.p_cz),
            ("p_1q_global", self.p_1q_global),
            ("p_1q_local", self.p_1q_local),
            ("p_prep", self.p_prep),
            ("p_meas", self.p_meas),
            ("p_move_z", self.p_move_z),
            ("p_idle", self.p_idle),
        ];
        for (name, p) in rates {
            let eff = p * self.rescale;
            if !(0.0..0.5).contains(&eff) {
                return Err(NoisyError::InvalidNoise(format!("{name} × rescale = {eff} outside [0, 0.5)")));
            }
        }
        Ok(())
    }

    fn eff(&self, p: f64) -> f64 {
        p * self.rescale
    }
}

/// Every elementary fault of `circuit` under `noise`, in time order.
///
/// Only `Normal` layers are noisy. Depolarizing channels are split into one
/// independent mechanism per Pauli term (p/3 each for one qubit; for CZ,
/// `bias_zz·p/3` on ZI, IZ, ZZ and the rest spread over the other twelve).
/// Each entangling layer has a move window before it and another after it
/// (atoms travel to their partners and back): Z on the moved qubits and
/// depolarizing idle noise on every qubit.
///
/// Injected qubits are prepared in |0⟩ and rotated by a local gate. A
/// preparation flip before the rotation yields the orthogonal state, which
/// shrinks every input Bloch vector by 1 − 2p: the same as depolarizing
/// noise of strength 3p/2. That, and the rotation's own local-gate error,
/// are applied just before the first noisy layer.
pub fn faults(circuit: &Circuit, noise: &NoiseModel) -> Result<Vec<Fault>> {
    noise.validate()?;
    let mut out = Vec::new();
    let mut push = |time: usize, kind: FaultKind, paulis: Vec<(usize, Pauli)>, p: f64| {
        if p > 0.0 {
            out.push(Fault { time, kind, paulis, p });
        }
    };
    let n = circuit.n_qubits;
    let first_normal = circuit.layers.iter().position(|l| l.tag == LayerTag::Normal);
    for (t, layer) in circuit.layers.iter().enumerate() {
        if layer.tag != LayerTag::Normal {
            continue;
        }
        if Some(t) == first_normal {
            for q in (0..n).filter(|&q| circuit.roles[q].is_some_and(|r| r.injected)) {
                for &pa in &PAULIS {
                    push(t, FaultKind::Injected, vec![(q, pa)], noise.eff(noise.p_prep) / 2.0);
                }
                for &pa in &PAULIS {
                    push(t, FaultKind::Injected, vec![(q, pa)], noise.eff(noise.p_1q_local) / 3.0);
                }
            }
        }
        if layer.is_entangling() {
            // out to the gate partners, then back home
            for time in [t, t + 1] {
                for &q in &layer.moves {
                    push(time, FaultKind::Move, vec![(q, Pauli::Z)], noise.eff(noise.p_move_z));
                }
                for q in 0..n {
                    for &pa in &PAULIS {
                        push(time, FaultKind::Idle, vec![(q, pa)], noise.eff(noise.p_idle) / 3.0);
                    }
                }
            }
        }
        let global = layer.ops.len() == n
            && layer.ops.iter().all(|o| o.gate.arity() == 1 && o.gate.is_unitary() && o.gate == layer.ops[0].gate);
        for op in &layer.ops {
            let q = op.qubits();
            match op.gate {
                Gate::PrepZ => push(t + 1, FaultKind::Prep, vec![(q[0], Pauli::X)], noise.eff(noise.p_prep)),
                g if g.measure_basis().is_some() => {
                    let flip = if g.measure_basis() == Some(Basis::X) { Pauli::Z } else { Pauli::X };
                    push(t, FaultKind::Measure, vec![(q[0], flip)], noise.eff(noise.p_meas));
                }
                g if !g.is_clifford() => return Err(NoisyError::NonClifford(g.to_string())),
                Gate::CZ | Gate::CNOT => {
                    let p = noise.eff(noise.p_cz);
                    let biased = [(Pauli::Z, Pauli::I), (Pauli::I, Pauli::Z), (Pauli::Z, Pauli::Z)];
                    for a in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
                        for b in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
                            if (a, b) == (Pauli::I, Pauli::I) {
                                continue;
                            }
                            let pt = if biased.contains(&(a, b)) {
                                noise.bias_zz * p / 3.0
                            } else {
                                (1.0 - noise.bias_zz) * p / 12.0
                            };
                            let paulis = [(q[0], a), (q[1], b)].into_iter().filter(|x| x.1 != Pauli::I).collect();
                            push(t + 1, FaultKind::Gate2q, paulis, pt);
                        }
                    }
                }
                _ => {
                    let p = if global { noise.p_1q_global } else { noise.p_1q_local };
                    for &pa in &PAULIS {
                        push(t + 1, FaultKind::Gate1q, vec![(q[0], pa)], noise.eff(p) / 3.0);
                    }
                }
            }
        }
    }
    Ok(out)
}
