//! State-vector simulator for up to 12 qubits. Qubit `q` is bit `q` of the
//! basis index.

use num_complex::Complex64;
use rand::Rng;

use crate::bloch::BlochVector;
use crate::circuit::Circuit;
use crate::gate::{magic_rotation, Basis, Gate, Mat2};
use crate::pauli::PauliString;
use crate::{Error, Result};

pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

/// Output of [`dense_run`]: final state and the measurement record
/// (`true` = −1 eigenvalue) in circuit order.
#[derive(Clone, Debug)]
pub struct DenseRun {
    pub state: DenseState,
    pub record: Vec<bool>,
}

impl DenseState {
    pub fn zero(n: usize) -> Result<Self> {
        if n > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits { n, max: MAX_DENSE_QUBITS });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(DenseState { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n {
            return Err(Error::InvalidCircuit(format!("{} amplitudes is not a power of two", amps.len())));
        }
        if n > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits { n, max: MAX_DENSE_QUBITS });
        }
        let s = DenseState { n, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalised(norm));
        }
        Ok(s)
    }

    /// Tensor product of single-qubit states, qubit 0 first.
    pub fn product(qubits: &[[Complex64; 2]]) -> Result<Self> {
        let n = qubits.len();
        let mut s = DenseState::zero(n)?;
        for (i, a) in s.amps.iter_mut().enumerate() {
            *a = qubits.iter().enumerate().fold(Complex64::new(1.0, 0.0), |acc, (q, v)| acc * v[(i >> q) & 1]);
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
        }
        Ok(())
    }

    pub fn apply_matrix(&mut self, q: usize, m: &Mat2) -> Result<()> {
        self.check(q)?;
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        let mask = (1 << a) | (1 << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, c: usize, t: usize) -> Result<()> {
        self.check(c)?;
        self.check(t)?;
        let (cb, tb) = (1 << c, 1 << t);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
        Ok(())
    }

    /// Multiply the state by a Pauli string (including its phase).
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::LengthMismatch { left: p.n(), right: self.n });
        }
        let (xm, zm) = masks(p);
        let ph = Complex64::i().powu(p.phase() as u32);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            // σ(x,z) = i^{x·z} X^x Z^z with our Y convention
            let zsign = if (i & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            let y_phase = Complex64::i().powu((xm & zm).count_ones());
            out[i ^ xm] += a * zsign * y_phase * ph;
        }
        self.amps = out;
        Ok(())
    }

    /// ⟨ψ|P|ψ⟩ including the phase of `p`.
    pub fn expectation(&self, p: &PauliString) -> Result<Complex64> {
        let mut moved = self.clone();
        moved.apply_pauli(p)?;
        Ok(self.amps.iter().zip(&moved.amps).map(|(a, b)| a.conj() * b).sum())
    }

    fn rotate_to_z(&mut self, q: usize, basis: Basis) -> Result<()> {
        match basis {
            Basis::Z => Ok(()),
            Basis::X => self.apply_matrix(q, &Gate::H.matrix().unwrap()),
            Basis::Y => self.apply_matrix(q, &Gate::SqrtX.matrix().unwrap()),
        }
    }

    fn rotate_from_z(&mut self, q: usize, basis: Basis) -> Result<()> {
        match basis {
            Basis::Z => Ok(()),
            Basis::X => self.apply_matrix(q, &Gate::H.matrix().unwrap()),
            Basis::Y => self.apply_matrix(q, &Gate::SqrtXDag.matrix().unwrap()),
        }
    }

    /// Probability of the −1 outcome when measuring `q` in `basis`.
    pub fn prob_one(&self, q: usize, basis: Basis) -> Result<f64> {
        let mut s = self.clone();
        s.rotate_to_z(q, basis)?;
        Ok(s.amps.iter().enumerate().filter(|(i, _)| i >> q & 1 == 1).map(|(_, a)| a.norm_sqr()).sum())
    }

    /// Project onto the given outcome, renormalise, and return its probability.
    pub fn project(&mut self, q: usize, basis: Basis, outcome: bool) -> Result<f64> {
        self.rotate_to_z(q, basis)?;
        let mut p = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i >> q & 1 == 1) != outcome {
                *a = Complex64::new(0.0, 0.0);
            } else {
                p += a.norm_sqr();
            }
        }
        if p > 0.0 {
            let s = p.sqrt().recip();
            for a in self.amps.iter_mut() {
                *a *= s;
            }
        }
        self.rotate_from_z(q, basis)?;
        Ok(p)
    }

    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, basis: Basis, rng: &mut R) -> Result<bool> {
        let p1 = self.prob_one(q, basis)?;
        let outcome = rng.random::<f64>() < p1;
        self.project(q, basis, outcome)?;
        Ok(outcome)
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<()> {
        if self.measure(q, Basis::Z, rng)? {
            self.apply_matrix(q, &Gate::X.matrix().unwrap())?;
        }
        Ok(())
    }

    /// Apply one circuit operation. Returns the outcome for measurements.
    pub fn apply<R: Rng + ?Sized>(&mut self, gate: Gate, qubits: &[usize], rng: &mut R) -> Result<Option<bool>> {
        if qubits.len() != gate.arity() {
            return Err(Error::Arity { gate: gate.to_string(), expected: gate.arity(), got: qubits.len() });
        }
        match gate {
            Gate::CZ => self.apply_cz(qubits[0], qubits[1])?,
            Gate::CNOT => self.apply_cnot(qubits[0], qubits[1])?,
            Gate::PrepZ => self.reset(qubits[0], rng)?,
            Gate::PrepMagic => {
                self.reset(qubits[0], rng)?;
                self.apply_matrix(qubits[0], &magic_rotation())?;
            }
            Gate::MeasureX | Gate::MeasureY | Gate::MeasureZ => {
                return self.measure(qubits[0], gate.measure_basis().unwrap(), rng).map(Some);
            }
            g => self.apply_matrix(qubits[0], &g.matrix().expect("single-qubit unitary"))?,
        }
        Ok(None)
    }

    pub fn bloch(&self, q: usize) -> Result<BlochVector> {
        self.check(q)?;
        let bit = 1 << q;
        let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                let c = a0.conj() * a1;
                x += 2.0 * c.re;
                y += 2.0 * c.im;
                z += a0.norm_sqr() - a1.norm_sqr();
            }
        }
        BlochVector::new(x, y, z)
    }
}

fn masks(p: &PauliString) -> (usize, usize) {
    let (mut xm, mut zm) = (0usize, 0usize);
    for q in 0..p.n() {
        xm |= (p.x_bit(q) as usize) << q;
        zm |= (p.z_bit(q) as usize) << q;
    }
    (xm, zm)
}

/// Run a circuit on a given input state. Preparations reset in place.
pub fn dense_run<R: Rng + ?Sized>(circuit: &Circuit, input: DenseState, rng: &mut R) -> Result<DenseRun> {
    if circuit.n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits { n: circuit.n_qubits, max: MAX_DENSE_QUBITS });
    }
    if input.n != circuit.n_qubits {
        return Err(Error::LengthMismatch { left: input.n, right: circuit.n_qubits });
    }
    let mut state = input;
    let mut record = Vec::new();
    for layer in &circuit.layers {
        for op in &layer.ops {
            if let Some(m) = state.apply(op.gate, op.qubits(), rng)? {
                record.push(m);
            }
        }
    }
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalised(norm));
    }
    Ok(DenseRun { state, record })
}

/// Reduced Bloch vector of one qubit.
pub fn bloch_of(state: &DenseState, q: usize) -> Result<BlochVector> {
    state.bloch(q)
}
