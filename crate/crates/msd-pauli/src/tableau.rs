//! Aaronson–Gottesman stabilizer tableau with bit-packed rows.
//!
//! Rows `0..n` are destabilizers, rows `n..2n` stabilizers.

use rand::Rng;

use crate::circuit::Circuit;
use crate::gate::{Basis, Gate};
use crate::pauli::{product_phase, words_for, PauliString};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    sign: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// `true` for the −1 eigenvalue.
    pub value: bool,
    pub deterministic: bool,
}

/// Expectation value of a Pauli observable on a stabilizer state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expectation {
    Plus,
    Minus,
    Random,
}

#[derive(Clone, Debug)]
pub struct TableauRun {
    pub tableau: StabilizerTableau,
    pub record: Vec<Outcome>,
}

impl StabilizerTableau {
    /// |0…0⟩.
    pub fn new(n: usize) -> Self {
        let words = words_for(n);
        let mut t = StabilizerTableau { n, words, x: vec![0; 2 * n * words], z: vec![0; 2 * n * words], sign: vec![false; 2 * n] };
        for q in 0..n {
            t.x[q * words + q / 64] |= 1 << (q % 64);
            t.z[(n + q) * words + q / 64] |= 1 << (q % 64);
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn bit(v: &[u64], row: usize, words: usize, q: usize) -> bool {
        v[row * words + q / 64] >> (q % 64) & 1 == 1
    }

    fn set_bit(v: &mut [u64], row: usize, words: usize, q: usize, b: bool) {
        let w = &mut v[row * words + q / 64];
        *w = (*w & !(1 << (q % 64))) | ((b as u64) << (q % 64));
    }

    fn row(&self, r: usize) -> PauliString {
        let mut p = PauliString::identity(self.n);
        for q in 0..self.n {
            p.set_bits(q, Self::bit(&self.x, r, self.words, q), Self::bit(&self.z, r, self.words, q));
        }
        if self.sign[r] {
            p.negate();
        }
        p
    }

    pub fn stabilizer(&self, i: usize) -> PauliString {
        self.row(self.n + i)
    }

    pub fn destabilizer(&self, i: usize) -> PauliString {
        self.row(i)
    }

    pub fn stabilizers(&self) -> Vec<PauliString> {
        (0..self.n).map(|i| self.stabilizer(i)).collect()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
        }
        Ok(())
    }

    /// Apply a unitary Clifford gate.
    pub fn apply(&mut self, gate: Gate, qubits: &[usize]) -> Result<()> {
        if qubits.len() != gate.arity() {
            return Err(Error::Arity { gate: gate.to_string(), expected: gate.arity(), got: qubits.len() });
        }
        for &q in qubits {
            self.check(q)?;
        }
        let w = self.words;
        if gate.arity() == 1 {
            let q = qubits[0];
            gate.conj1(false, false).ok_or_else(|| Error::NonClifford(gate.to_string()))?;
            for r in 0..2 * self.n {
                let (x, z) = (Self::bit(&self.x, r, w, q), Self::bit(&self.z, r, w, q));
                let (nx, nz, flip) = gate.conj1(x, z).unwrap();
                Self::set_bit(&mut self.x, r, w, q, nx);
                Self::set_bit(&mut self.z, r, w, q, nz);
                self.sign[r] ^= flip;
            }
        } else {
            let (a, b) = (qubits[0], qubits[1]);
            if a == b {
                return Err(Error::DuplicateQubit { qubit: a, layer: 0 });
            }
            gate.conj2(false, false, false, false).ok_or_else(|| Error::NonClifford(gate.to_string()))?;
            for r in 0..2 * self.n {
                let (xa, za) = (Self::bit(&self.x, r, w, a), Self::bit(&self.z, r, w, a));
                let (xb, zb) = (Self::bit(&self.x, r, w, b), Self::bit(&self.z, r, w, b));
                let (nxa, nza, nxb, nzb, flip) = gate.conj2(xa, za, xb, zb).unwrap();
                Self::set_bit(&mut self.x, r, w, a, nxa);
                Self::set_bit(&mut self.z, r, w, a, nza);
                Self::set_bit(&mut self.x, r, w, b, nxb);
                Self::set_bit(&mut self.z, r, w, b, nzb);
                self.sign[r] ^= flip;
            }
        }
        Ok(())
    }

    /// row h ← row i · row h
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut ph = 2 * (self.sign[h] as u32 + self.sign[i] as u32);
        for k in 0..w {
            ph += product_phase(self.x[i * w + k], self.z[i * w + k], self.x[h * w + k], self.z[h * w + k]);
        }
        for k in 0..w {
            self.x[h * w + k] ^= self.x[i * w + k];
            self.z[h * w + k] ^= self.z[i * w + k];
        }
        debug_assert!(ph.is_multiple_of(2), "stabilizer products stay Hermitian");
        self.sign[h] = ph & 3 == 2;
    }

    fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Outcome {
        let (n, w) = (self.n, self.words);
        if let Some(p) = (n..2 * n).find(|&r| Self::bit(&self.x, r, w, q)) {
            // row p − n is overwritten below, so it is skipped
            for r in 0..2 * n {
                if r != p && r != p - n && Self::bit(&self.x, r, w, q) {
                    self.rowsum(r, p);
                }
            }
            let d = p - n;
            for k in 0..w {
                self.x[d * w + k] = self.x[p * w + k];
                self.z[d * w + k] = self.z[p * w + k];
                self.x[p * w + k] = 0;
                self.z[p * w + k] = 0;
            }
            self.sign[d] = self.sign[p];
            Self::set_bit(&mut self.z, p, w, q, true);
            let value = rng.random::<bool>();
            self.sign[p] = value;
            Outcome { value, deterministic: false }
        } else {
            let mut acc = PauliString::identity(n);
            for i in 0..n {
                if Self::bit(&self.x, i, w, q) {
                    acc.mul_assign(&self.row(n + i)).expect("same length");
                }
            }
            Outcome { value: acc.phase() == 2, deterministic: true }
        }
    }

    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, basis: Basis, rng: &mut R) -> Result<Outcome> {
        self.check(q)?;
        let out = match basis {
            Basis::Z => self.measure_z(q, rng),
            Basis::X => {
                self.apply(Gate::H, &[q])?;
                let o = self.measure_z(q, rng);
                self.apply(Gate::H, &[q])?;
                o
            }
            Basis::Y => {
                self.apply(Gate::SqrtX, &[q])?;
                let o = self.measure_z(q, rng);
                self.apply(Gate::SqrtXDag, &[q])?;
                o
            }
        };
        Ok(out)
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<()> {
        if self.measure(q, Basis::Z, rng)?.value {
            self.apply(Gate::X, &[q])?;
        }
        Ok(())
    }

    /// Whether `p` has a definite value on the current state, and which.
    pub fn expectation(&self, p: &PauliString) -> Result<Expectation> {
        if p.n() != self.n {
            return Err(Error::LengthMismatch { left: p.n(), right: self.n });
        }
        for i in 0..self.n {
            if !self.stabilizer(i).commutes(p)? {
                return Ok(Expectation::Random);
            }
        }
        // p = ± Π stab_i over destabilizers anticommuting with p
        let mut acc = PauliString::identity(self.n);
        for i in 0..self.n {
            if !self.destabilizer(i).commutes(p)? {
                acc.mul_assign(&self.stabilizer(i))?;
            }
        }
        let mut bare = p.clone();
        bare.set_phase(0);
        let mut acc_bare = acc.clone();
        acc_bare.set_phase(0);
        debug_assert_eq!(bare, acc_bare);
        let rel = (acc.phase() + 4 - p.phase()) & 3;
        Ok(if rel == 0 { Expectation::Plus } else { Expectation::Minus })
    }

    /// Checks the symplectic invariants: stabilizers commute, destabilizer i
    /// anticommutes only with stabilizer i, and the 2n rows are independent.
    pub fn validate(&self) -> bool {
        let n = self.n;
        let rows: Vec<PauliString> = (0..2 * n).map(|r| self.row(r)).collect();
        for i in 0..n {
            for j in 0..n {
                if !rows[n + i].commutes(&rows[n + j]).unwrap() {
                    return false;
                }
                if rows[i].commutes(&rows[n + j]).unwrap() == (i == j) {
                    return false;
                }
            }
        }
        // rank over GF(2) of the 2n × 2n symplectic matrix
        let mut basis: Vec<Vec<u64>> = Vec::new();
        for r in &rows {
            let mut v: Vec<u64> = r.xs().iter().chain(r.zs()).copied().collect();
            for b in &basis {
                let lead = leading(b);
                if v[lead / 64] >> (lead % 64) & 1 == 1 {
                    v.iter_mut().zip(b).for_each(|(a, c)| *a ^= c);
                }
            }
            if v.iter().any(|&x| x != 0) {
                basis.push(v);
                basis.sort_by_key(|b| std::cmp::Reverse(leading(b)));
            }
        }
        basis.len() == 2 * n
    }
}

fn leading(v: &[u64]) -> usize {
    for (i, &w) in v.iter().enumerate().rev() {
        if w != 0 {
            return i * 64 + 63 - w.leading_zeros() as usize;
        }
    }
    0
}

/// Run a Clifford circuit from |0…0⟩.
pub fn tableau_run<R: Rng + ?Sized>(circuit: &Circuit, rng: &mut R) -> Result<TableauRun> {
    let mut t = StabilizerTableau::new(circuit.n_qubits);
    let mut record = Vec::new();
    for layer in &circuit.layers {
        for op in &layer.ops {
            let q = op.qubits();
            match op.gate {
                Gate::PrepZ => t.reset(q[0], rng)?,
                g if g.measure_basis().is_some() => record.push(t.measure(q[0], g.measure_basis().unwrap(), rng)?),
                g if !g.is_clifford() => return Err(Error::NonClifford(g.to_string())),
                g => t.apply(g, q)?,
            }
        }
    }
    Ok(TableauRun { tableau: t, record })
}
