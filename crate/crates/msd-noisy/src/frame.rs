//! Bit-sliced Pauli frames: one lane per shot (or per fault), 64 lanes a word.

use msd_pauli::{Basis, Circuit, Gate, LayerTag, Op, Pauli};

use crate::{NoisyError, Result};

#[derive(Clone, Debug)]
pub struct FrameSim {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

/// Unsigned action of a Clifford on (x, z) bits, as the images of the
/// basis vectors: out = Σ_i in_i · image_i.
fn images1(g: Gate) -> Option<[(bool, bool); 2]> {
    let a = g.conj1(true, false)?;
    let b = g.conj1(false, true)?;
    Some([(a.0, a.1), (b.0, b.1)])
}

fn images2(g: Gate) -> Option<[[bool; 4]; 4]> {
    let unit = |i: usize| {
        let v = [i == 0, i == 1, i == 2, i == 3];
        g.conj2(v[0], v[1], v[2], v[3]).map(|r| [r.0, r.1, r.2, r.3])
    };
    Some([unit(0)?, unit(1)?, unit(2)?, unit(3)?])
}

fn sel(b: bool, w: u64) -> u64 {
    if b {
        w
    } else {
        0
    }
}

impl FrameSim {
    pub fn new(n: usize, lanes: usize) -> FrameSim {
        let words = lanes.div_ceil(64).max(1);
        FrameSim { n, words, x: vec![0; n * words], z: vec![0; n * words] }
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn flip(&mut self, q: usize, p: Pauli, lane: usize) {
        let (xb, zb) = p.xz();
        let i = q * self.words + lane / 64;
        let bit = 1u64 << (lane % 64);
        if xb {
            self.x[i] ^= bit;
        }
        if zb {
            self.z[i] ^= bit;
        }
    }

    pub fn is_clear(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    fn apply1(&mut self, g: Gate, q: usize) -> Result<()> {
        let [ix, iz] = images1(g).ok_or_else(|| NoisyError::NonClifford(g.to_string()))?;
        for w in 0..self.words {
            let i = q * self.words + w;
            let (x, z) = (self.x[i], self.z[i]);
            self.x[i] = sel(ix.0, x) ^ sel(iz.0, z);
            self.z[i] = sel(ix.1, x) ^ sel(iz.1, z);
        }
        Ok(())
    }

    fn apply2(&mut self, g: Gate, a: usize, b: usize) -> Result<()> {
        let m = images2(g).ok_or_else(|| NoisyError::NonClifford(g.to_string()))?;
        for w in 0..self.words {
            let (ia, ib) = (a * self.words + w, b * self.words + w);
            let v = [self.x[ia], self.z[ia], self.x[ib], self.z[ib]];
            let mut out = [0u64; 4];
            for (k, o) in out.iter_mut().enumerate() {
                for (i, &vi) in v.iter().enumerate() {
                    *o ^= sel(m[i][k], vi);
                }
            }
            self.x[ia] = out[0];
            self.z[ia] = out[1];
            self.x[ib] = out[2];
            self.z[ib] = out[3];
        }
        Ok(())
    }

    /// Apply one operation; measurements return their flip words.
    pub fn apply(&mut self, op: &Op) -> Result<Option<Vec<u64>>> {
        let q = op.qubits();
        match op.gate {
            Gate::PrepZ => {
                let r = q[0] * self.words..(q[0] + 1) * self.words;
                self.x[r.clone()].fill(0);
                self.z[r].fill(0);
            }
            g if g.measure_basis().is_some() => {
                let r = q[0] * self.words..(q[0] + 1) * self.words;
                let flips = match g.measure_basis().unwrap() {
                    Basis::Z => self.x[r].to_vec(),
                    Basis::X => self.z[r].to_vec(),
                    Basis::Y => self.x[r.clone()].iter().zip(&self.z[r]).map(|(a, b)| a ^ b).collect(),
                };
                return Ok(Some(flips));
            }
            g if g.arity() == 2 => self.apply2(g, q[0], q[1])?,
            g => self.apply1(g, q[0])?,
        }
        Ok(None)
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Run frames through the noisy part of `circuit`. `inject(t, sim)` is
/// called before layer `t` (and once more with `t = layers.len()`).
/// Returns one flip-word vector per measurement. Non-`Normal` layers are
/// error-free and skipped; frames must still be empty when they occur.
pub fn propagate(
    circuit: &Circuit,
    lanes: usize,
    mut inject: impl FnMut(usize, &mut FrameSim),
) -> Result<Vec<Vec<u64>>> {
    let mut sim = FrameSim::new(circuit.n_qubits, lanes);
    let mut meas = Vec::new();
    for (t, layer) in circuit.layers.iter().enumerate() {
        inject(t, &mut sim);
        if layer.tag != LayerTag::Normal {
            debug_assert!(sim.is_clear(), "fault before an error-free layer");
            for op in &layer.ops {
                if op.gate.measure_basis().is_some() {
                    meas.push(vec![0; sim.words]);
                }
            }
            continue;
        }
        for op in &layer.ops {
            if let Some(f) = sim.apply(op)? {
                meas.push(f);
            }
        }
    }
    inject(circuit.layers.len(), &mut sim);
    Ok(meas)
}
