use msd_codes::{measurement_spec, support, CssCode};
use msd_pauli::{tableau_run, Basis, Circuit, Expectation, Gate, Layer, LayerTag, Op, Pauli, PauliString, QubitRole};
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::matrix::{ReductionMatrix, RowOpSequence};
use crate::{Result, SynthError};

/// Physical state placed on the qubit that hosts the logical column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InjectedInput {
    Zero,
    Plus,
    PlusI,
    /// The magic state along (1,1,1)/√3, followed by Rz(theta) if nonzero.
    Magic { theta: f64 },
}

impl InjectedInput {
    pub fn layers(self, q: usize) -> Vec<Layer> {
        let one = |g| Layer::tagged(vec![Op::one(g, q)], LayerTag::Input);
        match self {
            InjectedInput::Zero => vec![one(Gate::PrepZ)],
            InjectedInput::Plus => vec![one(Gate::PrepZ), one(Gate::SqrtY)],
            InjectedInput::PlusI => vec![one(Gate::PrepZ), one(Gate::SqrtXDag)],
            InjectedInput::Magic { theta: 0.0 } => vec![one(Gate::PrepMagic)],
            InjectedInput::Magic { theta } => vec![one(Gate::PrepMagic), one(Gate::Rz(theta))],
        }
    }
}

/// Build the encoder: inputs on the hosts named by the final matrix, then
/// the row ops replayed backwards as CNOTs, each written as
/// √Y†(t)·CZ(c,t)·√Y(t). Rotations meeting in the same slot are merged, so
/// a √Y followed by √Y† vanishes.
pub fn circuit_from_rops(seq: &RowOpSequence, fin: &ReductionMatrix, input: InjectedInput) -> Result<Circuit> {
    if !fin.is_final() {
        return Err(SynthError::Malformed("final matrix is not weight one per column".into()));
    }
    if fin.n_logicals() != 1 {
        return Err(SynthError::Malformed(format!("{} logical columns; expected 1", fin.n_logicals())));
    }
    let n = fin.n_rows();
    let logical_host = fin.host(fin.n_checks()).expect("final matrix");
    let plus_hosts: Vec<usize> = (0..fin.n_checks()).map(|c| fin.host(c).expect("final matrix")).collect();
    for op in seq.ops() {
        if op.source >= n || op.target >= n {
            return Err(SynthError::Malformed(format!("row op {op} outside {n} rows")));
        }
    }

    let mut c = Circuit::new(n);
    for q in 0..n {
        c.roles[q] = Some(QubitRole { block: 0, pos: q, injected: q == logical_host });
    }
    for l in input.layers(logical_host) {
        c.push_layer(l)?;
    }
    let others: Vec<Op> = (0..n).filter(|&q| q != logical_host).map(|q| Op::one(Gate::PrepZ, q)).collect();
    if !others.is_empty() {
        c.push_layer(Layer::new(others))?;
    }

    // quarter turns about Y per qubit in each slot between CZ layers
    let cz_layers: Vec<_> = seq.layers.iter().rev().collect();
    let mut slots = vec![vec![0i32; n]; cz_layers.len() + 1];
    for &q in &plus_hosts {
        slots[0][q] += 1;
    }
    for (k, layer) in cz_layers.iter().enumerate() {
        for op in layer.iter() {
            slots[k][op.target] -= 1;
            slots[k + 1][op.target] += 1;
        }
    }
    for (k, slot) in slots.iter().enumerate() {
        let ops: Vec<Op> = slot
            .iter()
            .enumerate()
            .filter_map(|(q, &t)| match t.rem_euclid(4) {
                1 => Some(Op::one(Gate::SqrtY, q)),
                2 => Some(Op::one(Gate::Y, q)),
                3 => Some(Op::one(Gate::SqrtYDag, q)),
                _ => None,
            })
            .collect();
        if !ops.is_empty() {
            c.push_layer(Layer::new(ops))?;
        }
        if let Some(layer) = cz_layers.get(k) {
            let mut l = Layer::new(layer.iter().map(|o| Op::two(Gate::CZ, o.source, o.target)).collect());
            l.moves = layer.iter().map(|o| o.target).collect();
            c.push_layer(l)?;
        }
    }
    c.validate()?;
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectionReport {
    pub injected_qubit: usize,
    /// Stabilizers confirmed +1 for each of the three test inputs.
    pub stabilizers_checked: usize,
    pub inputs_checked: usize,
}

/// Re-run the encoder with |0⟩, |+⟩ and |+i⟩ on the injected qubit and
/// confirm, by stabilizer simulation, that every check is +1 and the
/// matching logical Pauli is +1.
pub fn verify_injection(circuit: &Circuit, code: &CssCode) -> Result<InjectionReport> {
    if circuit.n_qubits != code.n {
        return Err(SynthError::Malformed(format!("circuit has {} qubits, code {}", circuit.n_qubits, code.n)));
    }
    let injected: Vec<usize> =
        (0..circuit.n_qubits).filter(|&q| circuit.roles[q].is_some_and(|r| r.injected)).collect();
    let &[host] = &injected[..] else {
        return Err(SynthError::Malformed(format!("{} injected qubits; expected 1", injected.len())));
    };
    let n = code.n;
    let on = |m: u64, p: Pauli| PauliString::on_support(n, support(m), p);
    let mut checks: Vec<(String, PauliString)> = Vec::new();
    for (i, &m) in code.x_checks.iter().enumerate() {
        checks.push((format!("X check {i}"), on(m, Pauli::X)?));
    }
    for (i, &m) in code.z_checks.iter().enumerate() {
        checks.push((format!("Z check {i}"), on(m, Pauli::Z)?));
    }
    let y_spec = measurement_spec(code, Basis::Y)?;
    let mut ly = on(y_spec.logical, Pauli::Y)?;
    if y_spec.logical_negative {
        ly.negate();
    }
    let cases = [
        ("|0>", InjectedInput::Zero, on(code.logical_z[0], Pauli::Z)?),
        ("|+>", InjectedInput::Plus, on(code.logical_x[0], Pauli::X)?),
        ("|+i>", InjectedInput::PlusI, ly),
    ];
    let inputs_checked = cases.len();
    let mut rng = StdRng::seed_from_u64(0);
    for (name, input, logical) in cases {
        let mut c = Circuit::new(n);
        c.roles = circuit.roles.clone();
        for l in input.layers(host) {
            c.push_layer(l)?;
        }
        for l in circuit.layers.iter().filter(|l| l.tag != LayerTag::Input) {
            c.push_layer(l.clone())?;
        }
        let t = tableau_run(&c, &mut rng)?.tableau;
        let fail = |detail: String| SynthError::Verification { input: name.into(), detail };
        for (label, s) in &checks {
            match t.expectation(s)? {
                Expectation::Plus => {}
                e => return Err(fail(format!("{label} is {e:?}"))),
            }
        }
        match t.expectation(&logical)? {
            Expectation::Plus => {}
            e => return Err(fail(format!("logical {logical} is {e:?}"))),
        }
    }
    Ok(InjectionReport { injected_qubit: host, stabilizers_checked: checks.len(), inputs_checked })
}
