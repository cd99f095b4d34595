//! Layered circuit IR and its line-based text format.
//!
//! ```text
//! QUBITS 7
//! # role: 6 block 0 pos 6 injected
//! LAYER 0 input
//! PREP_MAGIC 6
//! LAYER 1
//! PREP_Z 0 1 2 3 4 5
//! LAYER 2
//! CZ 0 1 2 3
//! # move: 1 3
//! DETECTOR 0 1 2 3
//! OBSERVABLE 0 1 5
//! ```
//!
//! Measurements are numbered in the order they appear; `DETECTOR` and
//! `OBSERVABLE` lines list measurement indices whose parity is tracked.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::gate::{Basis, Gate};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Op {
    pub gate: Gate,
    targets: [usize; 2],
}

impl Op {
    pub fn one(gate: Gate, q: usize) -> Op {
        debug_assert_eq!(gate.arity(), 1);
        Op { gate, targets: [q, usize::MAX] }
    }

    pub fn two(gate: Gate, a: usize, b: usize) -> Op {
        debug_assert_eq!(gate.arity(), 2);
        Op { gate, targets: [a, b] }
    }

    pub fn qubits(&self) -> &[usize] {
        &self.targets[..self.gate.arity()]
    }

    /// Same gate on relabelled qubits.
    pub fn map_qubits(&self, f: impl Fn(usize) -> usize) -> Op {
        let mut targets = self.targets;
        for t in &mut targets[..self.gate.arity()] {
            *t = f(*t);
        }
        Op { gate: self.gate, targets }
    }
}

/// How the noise model treats a layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LayerTag {
    #[default]
    Normal,
    /// Physical input preparation on injected qubits (magic states and
    /// their rotations). Error-free; modelled as coherent input.
    Input,
    /// Error-free reference preparation used for channel learning.
    Noiseless,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Layer {
    pub ops: Vec<Op>,
    pub tag: LayerTag,
    /// Qubits physically moved to reach their partners in this layer.
    pub moves: Vec<usize>,
}

impl Layer {
    pub fn new(ops: Vec<Op>) -> Layer {
        Layer { ops, tag: LayerTag::Normal, moves: Vec::new() }
    }

    pub fn tagged(ops: Vec<Op>, tag: LayerTag) -> Layer {
        Layer { ops, tag, moves: Vec::new() }
    }

    pub fn is_entangling(&self) -> bool {
        self.ops.iter().any(|o| o.gate.arity() == 2)
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.ops.iter().flat_map(|o| o.qubits().iter().copied())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QubitRole {
    pub block: usize,
    pub pos: usize,
    pub injected: bool,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub layers: Vec<Layer>,
    pub roles: Vec<Option<QubitRole>>,
    pub detectors: Vec<Vec<usize>>,
    pub observables: Vec<Vec<usize>>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Circuit {
        Circuit { n_qubits, roles: vec![None; n_qubits], ..Default::default() }
    }

    pub fn push_layer(&mut self, layer: Layer) -> Result<()> {
        check_layer(&layer, self.n_qubits, self.layers.len())?;
        self.layers.push(layer);
        Ok(())
    }

    /// Append another circuit's layers, shifting its measurement indices.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::LengthMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        let offset = self.num_measurements();
        for l in &other.layers {
            self.push_layer(l.clone())?;
        }
        let shift = |v: &Vec<usize>| v.iter().map(|m| m + offset).collect::<Vec<_>>();
        self.detectors.extend(other.detectors.iter().map(shift));
        self.observables.extend(other.observables.iter().map(shift));
        Ok(())
    }

    pub fn num_measurements(&self) -> usize {
        self.layers.iter().flat_map(|l| &l.ops).filter(|o| o.gate.measure_basis().is_some()).count()
    }

    /// `(qubit, basis)` for each measurement in record order.
    pub fn measurements(&self) -> Vec<(usize, Basis)> {
        self.layers
            .iter()
            .flat_map(|l| &l.ops)
            .filter_map(|o| o.gate.measure_basis().map(|b| (o.qubits()[0], b)))
            .collect()
    }

    pub fn is_clifford(&self) -> bool {
        self.layers.iter().flat_map(|l| &l.ops).all(|o| o.gate.is_clifford())
    }

    pub fn entangling_layers(&self) -> usize {
        self.layers.iter().filter(|l| l.is_entangling()).count()
    }

    pub fn count_gate(&self, f: impl Fn(Gate) -> bool) -> usize {
        self.layers.iter().flat_map(|l| &l.ops).filter(|o| f(o.gate)).count()
    }

    /// Pairs of each entangling layer, in order.
    pub fn cz_layers(&self) -> Vec<Vec<(usize, usize)>> {
        self.layers
            .iter()
            .filter(|l| l.is_entangling())
            .map(|l| l.ops.iter().filter(|o| o.gate.arity() == 2).map(|o| (o.qubits()[0], o.qubits()[1])).collect())
            .collect()
    }

    /// Inverse of a purely unitary circuit.
    pub fn inverse(&self) -> Result<Circuit> {
        let mut out = Circuit::new(self.n_qubits);
        out.roles = self.roles.clone();
        for l in self.layers.iter().rev() {
            let mut ops = Vec::with_capacity(l.ops.len());
            for o in l.ops.iter().rev() {
                let g = o.gate.inverse().ok_or_else(|| Error::InvalidCircuit(format!("{} has no inverse", o.gate)))?;
                ops.push(Op { gate: g, targets: o.targets });
            }
            out.push_layer(Layer { ops, tag: l.tag, moves: l.moves.clone() })?;
        }
        Ok(out)
    }

    /// Checks the IR invariants: layer legality, index ranges, and that
    /// non-Clifford inputs sit on injected qubits ahead of any entangling
    /// layer.
    pub fn validate(&self) -> Result<()> {
        if self.roles.len() != self.n_qubits {
            return Err(Error::InvalidCircuit("role table length differs from qubit count".into()));
        }
        let mut seen_entangling = false;
        for (i, l) in self.layers.iter().enumerate() {
            check_layer(l, self.n_qubits, i)?;
            for o in &l.ops {
                if !o.gate.is_clifford() {
                    if seen_entangling {
                        return Err(Error::InvalidCircuit(format!("{} after an entangling layer", o.gate)));
                    }
                    let q = o.qubits()[0];
                    if !self.roles[q].is_some_and(|r| r.injected) {
                        return Err(Error::InvalidCircuit(format!("{} on non-injected qubit {q}", o.gate)));
                    }
                }
            }
            seen_entangling |= l.is_entangling();
        }
        let m = self.num_measurements();
        for idx in self.detectors.iter().chain(&self.observables).flatten() {
            if *idx >= m {
                return Err(Error::InvalidCircuit(format!("measurement index {idx} out of range ({m} measurements)")));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "QUBITS {}", self.n_qubits);
        for (q, r) in self.roles.iter().enumerate() {
            if let Some(r) = r {
                let _ = writeln!(s, "# role: {q} block {} pos {}{}", r.block, r.pos, if r.injected { " injected" } else { "" });
            }
        }
        for (i, l) in self.layers.iter().enumerate() {
            let tag = match l.tag {
                LayerTag::Normal => "",
                LayerTag::Input => " input",
                LayerTag::Noiseless => " noiseless",
            };
            let _ = writeln!(s, "LAYER {i}{tag}");
            let mut k = 0;
            while k < l.ops.len() {
                let g = l.ops[k].gate;
                let mut line = g.to_string();
                while k < l.ops.len() && l.ops[k].gate == g {
                    for q in l.ops[k].qubits() {
                        let _ = write!(line, " {q}");
                    }
                    k += 1;
                }
                let _ = writeln!(s, "{line}");
            }
            if !l.moves.is_empty() {
                let _ = writeln!(s, "# move: {}", join(&l.moves));
            }
        }
        for d in &self.detectors {
            let _ = writeln!(s, "DETECTOR {}", join(d));
        }
        for o in &self.observables {
            let _ = writeln!(s, "OBSERVABLE {}", join(o));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        let mut current: Option<Layer> = None;
        let err = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
        let nums = |line: usize, toks: &[&str]| -> Result<Vec<usize>> {
            toks.iter().map(|t| t.parse::<usize>().map_err(|_| err(line, format!("bad integer '{t}'")))).collect()
        };
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(r) = rest.strip_prefix("role:") {
                    let toks: Vec<&str> = r.split_whitespace().collect();
                    let c = circuit.as_mut().ok_or_else(|| err(ln, "role before QUBITS".into()))?;
                    if toks.len() < 5 || toks[1] != "block" || toks[3] != "pos" {
                        return Err(err(ln, "malformed role annotation".into()));
                    }
                    let v = nums(ln, &[toks[0], toks[2], toks[4]])?;
                    let injected = toks.get(5) == Some(&"injected");
                    *c.roles.get_mut(v[0]).ok_or_else(|| err(ln, "role qubit out of range".into()))? =
                        Some(QubitRole { block: v[1], pos: v[2], injected });
                } else if let Some(r) = rest.strip_prefix("move:") {
                    let l = current.as_mut().ok_or_else(|| err(ln, "move outside a layer".into()))?;
                    l.moves = nums(ln, &r.split_whitespace().collect::<Vec<_>>())?;
                }
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "QUBITS" => {
                    let n = nums(ln, &toks[1..])?;
                    circuit = Some(Circuit::new(*n.first().ok_or_else(|| err(ln, "missing qubit count".into()))?));
                }
                "LAYER" => {
                    let c = circuit.as_mut().ok_or_else(|| err(ln, "LAYER before QUBITS".into()))?;
                    if let Some(l) = current.take() {
                        c.push_layer(l)?;
                    }
                    let tag = match toks.get(2).copied() {
                        None => LayerTag::Normal,
                        Some("input") => LayerTag::Input,
                        Some("noiseless") => LayerTag::Noiseless,
                        Some(t) => return Err(err(ln, format!("unknown layer tag '{t}'"))),
                    };
                    current = Some(Layer::tagged(Vec::new(), tag));
                }
                "DETECTOR" | "OBSERVABLE" => {
                    let c = circuit.as_mut().ok_or_else(|| err(ln, "record before QUBITS".into()))?;
                    if let Some(l) = current.take() {
                        c.push_layer(l)?;
                    }
                    let v = nums(ln, &toks[1..])?;
                    if toks[0] == "DETECTOR" {
                        c.detectors.push(v);
                    } else {
                        c.observables.push(v);
                    }
                }
                name => {
                    let g = Gate::from_name(name).ok_or_else(|| err(ln, format!("unknown gate '{name}'")))?;
                    let l = current.as_mut().ok_or_else(|| err(ln, "gate outside a layer".into()))?;
                    let qs = nums(ln, &toks[1..])?;
                    if qs.is_empty() || qs.len() % g.arity() != 0 {
                        return Err(err(ln, format!("{name} needs a multiple of {} targets", g.arity())));
                    }
                    for chunk in qs.chunks(g.arity()) {
                        l.ops.push(if g.arity() == 1 { Op::one(g, chunk[0]) } else { Op::two(g, chunk[0], chunk[1]) });
                    }
                }
            }
        }
        let mut c = circuit.ok_or_else(|| err(0, "missing QUBITS header".into()))?;
        if let Some(l) = current.take() {
            c.push_layer(l)?;
        }
        c.validate()?;
        Ok(c)
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn check_layer(layer: &Layer, n: usize, index: usize) -> Result<()> {
    let mut used = BTreeSet::new();
    for o in &layer.ops {
        for &q in o.qubits() {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
            if !used.insert(q) {
                return Err(Error::DuplicateQubit { qubit: q, layer: index });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Circuit {
        let mut c = Circuit::new(4);
        c.roles[3] = Some(QubitRole { block: 0, pos: 3, injected: true });
        c.push_layer(Layer::tagged(vec![Op::one(Gate::PrepMagic, 3)], LayerTag::Input)).unwrap();
        c.push_layer(Layer::tagged(vec![Op::one(Gate::Rz(0.1 * std::f64::consts::PI), 3)], LayerTag::Input)).unwrap();
        c.push_layer(Layer::new(vec![Op::one(Gate::PrepZ, 0), Op::one(Gate::PrepZ, 1), Op::one(Gate::PrepZ, 2)])).unwrap();
        let mut l = Layer::new(vec![Op::two(Gate::CZ, 0, 1), Op::two(Gate::CZ, 3, 2)]);
        l.moves = vec![1, 2];
        c.push_layer(l).unwrap();
        c.push_layer(Layer::new(vec![Op::one(Gate::SqrtYDag, 2), Op::one(Gate::SqrtX, 0)])).unwrap();
        c.push_layer(Layer::new((0..4).map(|q| Op::one(Gate::MeasureZ, q)).collect())).unwrap();
        c.detectors.push(vec![0, 1]);
        c.observables.push(vec![2, 3]);
        c
    }

    #[test]
    fn text_round_trip() {
        let c = sample();
        let text = c.to_text();
        let back = Circuit::from_text(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn duplicate_qubit_in_layer_is_rejected() {
        let mut c = Circuit::new(3);
        let e = c.push_layer(Layer::new(vec![Op::two(Gate::CZ, 0, 1), Op::one(Gate::H, 1)]));
        assert!(matches!(e, Err(Error::DuplicateQubit { qubit: 1, .. })));
    }

    #[test]
    fn rz_after_entangling_layer_is_invalid() {
        let mut c = Circuit::new(2);
        c.roles[0] = Some(QubitRole { block: 0, pos: 0, injected: true });
        c.push_layer(Layer::new(vec![Op::two(Gate::CZ, 0, 1)])).unwrap();
        c.push_layer(Layer::new(vec![Op::one(Gate::Rz(0.2), 0)])).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn inverse_reverses_and_inverts() {
        let mut c = Circuit::new(2);
        c.push_layer(Layer::new(vec![Op::one(Gate::SqrtX, 0), Op::one(Gate::S, 1)])).unwrap();
        c.push_layer(Layer::new(vec![Op::two(Gate::CZ, 0, 1)])).unwrap();
        let inv = c.inverse().unwrap();
        assert_eq!(inv.layers[0].ops[0].gate, Gate::CZ);
        assert_eq!(inv.layers[1].ops, vec![Op::one(Gate::SDag, 1), Op::one(Gate::SqrtXDag, 0)]);
    }

    #[test]
    fn measurements_in_record_order() {
        let c = sample();
        assert_eq!(c.num_measurements(), 4);
        assert_eq!(c.measurements()[2], (2, Basis::Z));
        assert_eq!(c.entangling_layers(), 1);
    }
}
