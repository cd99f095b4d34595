use msd_codes::{measurement_spec, support, CssCode};
use msd_pauli::{tableau_run, Basis, Circuit, Expectation, Gate, Layer, LayerTag, Op, Pauli, PauliString, QubitRole};
use msd_synth::{circuit_from_rops, reduce, InjectedInput};
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::distill::{distillation_layers, OUTPUT};
use crate::{NoisyError, Result};

/// What the injected physical qubits start in.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockInput {
    /// Magic states with per-block Rz errors (non-Clifford; not simulable
    /// by the frame tools, kept for export and the ideal channel).
    Magic { angles: Vec<f64> },
    /// Error-free Clifford preparation whose noiseless readout is
    /// deterministic in every basis.
    Reference,
}

/// Where each block's qubits, detectors and observable sit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoryLayout {
    pub blocks: usize,
    pub block_size: usize,
    /// Readout basis per block.
    pub bases: Vec<Basis>,
    /// Detector count per block, block-major.
    pub detectors_per_block: Vec<usize>,
    /// Observables whose logical operator is minus the product of the
    /// measured single-qubit Paulis; XOR this into parities to get
    /// logical outcomes.
    pub negative_observables: u32,
}

impl FactoryLayout {
    pub fn num_detectors(&self) -> usize {
        self.detectors_per_block.iter().sum()
    }

    pub fn block_detector_mask(&self, b: usize) -> u128 {
        let start: usize = self.detectors_per_block[..b].iter().sum();
        let len = self.detectors_per_block[b];
        if len == 0 {
            0
        } else {
            (u128::MAX >> (128 - len)) << start
        }
    }

    /// Detectors of the given blocks.
    pub fn detector_mask(&self, blocks: &[usize]) -> u128 {
        blocks.iter().fold(0, |m, &b| m | self.block_detector_mask(b))
    }
}

/// The encoder for `code` with a magic input rotated by `theta`.
pub fn build_injection_block(code: &CssCode, theta: f64) -> Result<Circuit> {
    let r = reduce(code)?;
    Ok(circuit_from_rops(&r.ops, &r.final_matrix, InjectedInput::Magic { theta })?)
}

fn injected_qubit(block: &Circuit) -> usize {
    (0..block.n_qubits).find(|&q| block.roles[q].is_some_and(|r| r.injected)).expect("encoder marks its input")
}

/// Copies of the encoder on `blocks` blocks, with the error-free input
/// layers supplied by the caller.
fn stacked(code: &CssCode, blocks: usize, inputs: Vec<Layer>) -> Result<(Circuit, Vec<usize>)> {
    let block = build_injection_block(code, 0.0)?;
    let n = code.n;
    let host = injected_qubit(&block);
    let mut c = Circuit::new(blocks * n);
    for b in 0..blocks {
        for q in 0..n {
            c.roles[b * n + q] = Some(QubitRole { block: b, pos: q, injected: q == host });
        }
    }
    for l in inputs {
        c.push_layer(l)?;
    }
    for l in block.layers.iter().filter(|l| l.tag == LayerTag::Normal) {
        let mut ops = Vec::new();
        let mut moves = Vec::new();
        for b in 0..blocks {
            let off = b * n;
            ops.extend(l.ops.iter().map(|o| o.map_qubits(|t| t + off)));
            moves.extend(l.moves.iter().map(|m| m + off));
        }
        c.push_layer(Layer { ops, tag: LayerTag::Normal, moves })?;
    }
    let hosts = (0..blocks).map(|b| b * n + host).collect();
    Ok((c, hosts))
}

/// Transversal readout of every block and the detector/observable lists.
fn measure_blocks(c: &mut Circuit, code: &CssCode, bases: &[Basis]) -> Result<FactoryLayout> {
    let n = code.n;
    let mut ops = Vec::new();
    for (b, &basis) in bases.iter().enumerate() {
        ops.extend((0..n).map(|q| Op::one(Gate::measure(basis), b * n + q)));
    }
    let base = c.num_measurements();
    c.push_layer(Layer::new(ops))?;
    let mut per_block = Vec::new();
    let mut negative = 0u32;
    for (b, &basis) in bases.iter().enumerate() {
        let spec = measurement_spec(code, basis)?;
        negative |= (spec.logical_negative as u32) << b;
        for &d in &spec.detectors {
            c.detectors.push(support(d).into_iter().map(|q| base + b * n + q).collect());
        }
        per_block.push(spec.detectors.len());
        c.observables.push(support(spec.logical).into_iter().map(|q| base + b * n + q).collect());
    }
    if c.detectors.len() > 128 {
        return Err(NoisyError::TooManyDetectors(c.detectors.len()));
    }
    c.validate()?;
    Ok(FactoryLayout { blocks: bases.len(), block_size: n, bases: bases.to_vec(), detectors_per_block: per_block, negative_observables: negative })
}

fn input_layers(hosts: &[usize], angles: &[f64]) -> Vec<Layer> {
    let mut v = vec![Layer::tagged(hosts.iter().map(|&q| Op::one(Gate::PrepMagic, q)).collect(), LayerTag::Input)];
    let rz: Vec<Op> = hosts.iter().zip(angles).filter(|(_, &a)| a != 0.0).map(|(&q, &a)| Op::one(Gate::Rz(a), q)).collect();
    if !rz.is_empty() {
        v.push(Layer::tagged(rz, LayerTag::Input));
    }
    v
}

/// Gates preparing the +1 eigenstate of `basis` from |0⟩.
fn basis_prep(basis: Basis) -> Option<Gate> {
    match basis {
        Basis::X => Some(Gate::SqrtY),
        Basis::Y => Some(Gate::SqrtXDag),
        Basis::Z => None,
    }
}

/// Reference inputs on the five injected qubits: the distillation circuit
/// run backwards from |1⟩|b+⟩|0⟩|1⟩|1⟩, so the noiseless readout is fixed.
/// All layers are Clifford and tagged noiseless.
pub fn reference_layers(hosts: &[usize], basis: Basis) -> Result<Vec<Layer>> {
    let mut layers = vec![Layer::tagged(hosts.iter().map(|&q| Op::one(Gate::PrepZ, q)).collect(), LayerTag::Noiseless)];
    let mut second: Vec<Op> = [0, 3, 4].iter().map(|&a| Op::one(Gate::X, hosts[a])).collect();
    if let Some(g) = basis_prep(basis) {
        second.push(Op::one(g, hosts[OUTPUT]));
    }
    layers.push(Layer::tagged(second, LayerTag::Noiseless));
    let mut fwd = Circuit::new(5);
    for l in distillation_layers() {
        fwd.push_layer(l)?;
    }
    for l in fwd.inverse()?.layers {
        let ops = l.ops.iter().map(|o| o.map_qubits(|t| hosts[t])).collect();
        layers.push(Layer::tagged(ops, LayerTag::Noiseless));
    }
    Ok(layers)
}

/// Distillation gates applied transversally. On codes with n ≡ 3 mod 4
/// transversal S acts as logical S†, so the phase gates are conjugated.
fn transversal_distillation(c: &mut Circuit, n: usize) -> Result<()> {
    let flip = n % 4 == 3;
    for l in distillation_layers() {
        let mut ops = Vec::new();
        let mut moves = Vec::new();
        for o in &l.ops {
            let g = if flip { o.gate.complex_conjugate() } else { o.gate };
            match *o.qubits() {
                [a] => ops.extend((0..n).map(|i| Op::one(g, a * n + i))),
                [a, b] => {
                    ops.extend((0..n).map(|i| Op::two(g, a * n + i, b * n + i)));
                    moves.extend((0..n).map(|i| b * n + i));
                }
                _ => unreachable!(),
            }
        }
        c.push_layer(Layer { ops, tag: LayerTag::Normal, moves })?;
    }
    Ok(())
}

fn factory_bases(output: Basis) -> Vec<Basis> {
    (0..5).map(|b| if b == OUTPUT { output } else { Basis::Z }).collect()
}

/// Five encoded magic states, the distillation circuit applied
/// transversally, then every block read out: ancilla blocks in Z, the
/// output block in `output`.
pub fn build_factory_circuit(code: &CssCode, angles: &[f64; 5], output: Basis) -> Result<(Circuit, FactoryLayout)> {
    let n = code.n;
    let block = build_injection_block(code, 0.0)?;
    let host = injected_qubit(&block);
    let hosts: Vec<usize> = (0..5).map(|b| b * n + host).collect();
    let (mut c, _) = stacked(code, 5, input_layers(&hosts, angles))?;
    transversal_distillation(&mut c, n)?;
    let layout = measure_blocks(&mut c, code, &factory_bases(output))?;
    Ok((c, layout))
}

/// Same circuit with the deterministic reference input instead of magic
/// states. The noisy layers are identical, hence so is the error model.
pub fn build_reference_factory(code: &CssCode, output: Basis) -> Result<(Circuit, FactoryLayout)> {
    let n = code.n;
    let block = build_injection_block(code, 0.0)?;
    let host = injected_qubit(&block);
    let hosts: Vec<usize> = (0..5).map(|b| b * n + host).collect();
    let (mut c, _) = stacked(code, 5, reference_layers(&hosts, output)?)?;
    transversal_distillation(&mut c, n)?;
    let layout = measure_blocks(&mut c, code, &factory_bases(output))?;
    Ok((c, layout))
}

/// One encoded block read out transversally in `basis`. The reference
/// input is the +1 eigenstate of `basis`.
pub fn build_injection_readout(code: &CssCode, input: BlockInput, basis: Basis) -> Result<(Circuit, FactoryLayout)> {
    let block = build_injection_block(code, 0.0)?;
    let host = injected_qubit(&block);
    let inputs = match input {
        BlockInput::Magic { angles } => input_layers(&[host], &angles),
        BlockInput::Reference => {
            let mut v = vec![Layer::tagged(vec![Op::one(Gate::PrepZ, host)], LayerTag::Noiseless)];
            if let Some(g) = basis_prep(basis) {
                v.push(Layer::tagged(vec![Op::one(g, host)], LayerTag::Noiseless));
            }
            v
        }
    };
    let (mut c, _) = stacked(code, 1, inputs)?;
    let layout = measure_blocks(&mut c, code, &[basis])?;
    Ok((c, layout))
}

/// Noiseless detector and observable values of a Clifford circuit whose
/// measurements all sit in its last layer (bit i = parity of detector or
/// observable i). Errors if any of them is not deterministic.
pub fn noiseless_record(c: &Circuit) -> Result<(u128, u32)> {
    let Some((last, body)) = c.layers.split_last() else {
        return Ok((0, 0));
    };
    if body.iter().flat_map(|l| &l.ops).any(|o| o.gate.measure_basis().is_some()) {
        return Err(NoisyError::NotDeterministic("measurements before the last layer".into()));
    }
    let mut pre = Circuit::new(c.n_qubits);
    for l in body {
        pre.push_layer(l.clone())?;
    }
    let t = tableau_run(&pre, &mut StdRng::seed_from_u64(0))?.tableau;
    let meas: Vec<(usize, Basis)> =
        last.ops.iter().filter_map(|o| o.gate.measure_basis().map(|b| (o.qubits()[0], b))).collect();
    let value = |idx: &[usize], what: String| -> Result<bool> {
        let mut p = PauliString::identity(c.n_qubits);
        for &m in idx {
            let (q, b) = meas[m];
            p.mul_assign(&PauliString::single(c.n_qubits, q, basis_pauli(b))?)?;
        }
        match t.expectation(&p)? {
            Expectation::Plus => Ok(false),
            Expectation::Minus => Ok(true),
            Expectation::Random => Err(NoisyError::NotDeterministic(what)),
        }
    };
    let mut det = 0u128;
    for (i, d) in c.detectors.iter().enumerate() {
        det |= (value(d, format!("detector {i}"))? as u128) << i;
    }
    let mut obs = 0u32;
    for (i, o) in c.observables.iter().enumerate() {
        obs |= (value(o, format!("observable {i}"))? as u32) << i;
    }
    Ok((det, obs))
}

fn basis_pauli(b: Basis) -> Pauli {
    match b {
        Basis::X => Pauli::X,
        Basis::Y => Pauli::Y,
        Basis::Z => Pauli::Z,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distill::ACCEPT_WORD;
    use msd_codes::{color_code, trivial_code};

    #[test]
    fn factory_sizes() {
        let (c3, l3) = build_factory_circuit(&color_code(3).unwrap(), &[0.0; 5], Basis::Z).unwrap();
        assert_eq!(c3.n_qubits, 35);
        assert_eq!(l3.num_detectors(), 15);
        let (c5, l5) = build_factory_circuit(&color_code(5).unwrap(), &[0.0; 5], Basis::X).unwrap();
        assert_eq!(c5.n_qubits, 85);
        assert_eq!(l5.num_detectors(), 40);
        assert_eq!(c5.observables.len(), 5);
    }

    #[test]
    fn three_transversal_cz_rounds_after_encoding() {
        let code = color_code(3).unwrap();
        let (c, _) = build_factory_circuit(&code, &[0.0; 5], Basis::Z).unwrap();
        // 3 encoder layers then 3 distillation rounds
        assert_eq!(c.entangling_layers(), 6);
        assert_eq!(c.count_gate(|g| g == Gate::CZ), 5 * 9 + 6 * 7);
    }

    #[test]
    fn rotation_only_changes_inputs() {
        let code = color_code(3).unwrap();
        let (a, _) = build_factory_circuit(&code, &[0.0; 5], Basis::Z).unwrap();
        let (b, _) = build_factory_circuit(&code, &[0.1, 0.0, 0.0, 0.0, 0.2], Basis::Z).unwrap();
        assert_eq!(b.layers.len(), a.layers.len() + 1);
        assert_eq!(b.count_gate(|g| matches!(g, Gate::Rz(_))), 2);
    }

    #[test]
    fn reference_readout_is_the_accept_pattern() {
        for code in [trivial_code(), color_code(3).unwrap(), color_code(5).unwrap()] {
            for basis in Basis::ALL {
                let (c, layout) = build_reference_factory(&code, basis).unwrap();
                let (det, obs) = noiseless_record(&c).unwrap();
                assert_eq!(obs ^ layout.negative_observables, ACCEPT_WORD, "n={} basis={basis}", code.n);
                // X/Z detectors are +1 stabilizers; weight-4 and -8 Y detectors too
                assert_eq!(det, 0);
                assert_eq!(layout.blocks, 5);
            }
        }
    }

    #[test]
    fn reference_injection_reads_plus_one() {
        for code in [color_code(3).unwrap(), color_code(5).unwrap()] {
            for basis in Basis::ALL {
                let (c, layout) = build_injection_readout(&code, BlockInput::Reference, basis).unwrap();
                let (det, obs) = noiseless_record(&c).unwrap();
                let neg = measurement_spec(&code, basis).unwrap().logical_negative;
                assert_eq!(layout.negative_observables, neg as u32);
                assert_eq!((det, obs ^ layout.negative_observables), (0, 0));
            }
        }
    }

    #[test]
    fn detector_masks_are_block_major() {
        let (_, l) = build_factory_circuit(&color_code(3).unwrap(), &[0.0; 5], Basis::Y).unwrap();
        assert_eq!(l.block_detector_mask(0), 0b111);
        assert_eq!(l.block_detector_mask(4), 0b111 << 12);
        assert_eq!(l.detector_mask(&[0, 2, 3, 4]).count_ones(), 12);
    }
}
