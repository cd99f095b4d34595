use msd_pauli::{Pauli, PauliString};

/// General stabilizer code with explicit Pauli generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerCode {
    pub n: usize,
    pub generators: Vec<PauliString>,
    pub logical_x: PauliString,
    pub logical_z: PauliString,
}

/// The cyclic [[5,1,3]] code: XZZXI and its cyclic shifts.
pub fn perfect_code_513() -> StabilizerCode {
    let generators = ["XZZX_", "_XZZX", "X_XZZ", "ZX_XZ"].iter().map(|s| s.parse().expect("static string")).collect();
    StabilizerCode {
        n: 5,
        generators,
        logical_x: PauliString::on_support(5, 0..5, Pauli::X).expect("in range"),
        logical_z: PauliString::on_support(5, 0..5, Pauli::Z).expect("in range"),
    }
}

impl StabilizerCode {
    /// All 2^r elements of the stabilizer group, phases included.
    pub fn group(&self) -> Vec<PauliString> {
        let r = self.generators.len();
        (0..1u32 << r)
            .map(|m| {
                let mut acc = PauliString::identity(self.n);
                for (i, g) in self.generators.iter().enumerate() {
                    if m >> i & 1 == 1 {
                        acc.mul_assign(g).expect("same length");
                    }
                }
                acc
            })
            .collect()
    }

    /// Exhaustive distance over all 4^n Paulis: the smallest weight of an
    /// operator commuting with every generator but outside the group.
    pub fn brute_force_distance(&self) -> Option<usize> {
        let mut group: Vec<PauliString> = self.group();
        for g in group.iter_mut() {
            g.set_phase(0);
        }
        let mut best: Option<usize> = None;
        for code in 1..4usize.pow(self.n as u32) {
            let mut p = PauliString::identity(self.n);
            for q in 0..self.n {
                p.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][code / 4usize.pow(q as u32) % 4]).expect("in range");
            }
            if self.generators.iter().all(|g| g.commutes(&p).expect("same length")) && !group.contains(&p) {
                let w = p.weight();
                best = Some(best.map_or(w, |b: usize| b.min(w)));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_commute_pairwise() {
        let c = perfect_code_513();
        for a in &c.generators {
            for b in &c.generators {
                assert!(a.commutes(b).unwrap());
            }
            assert_eq!(a.weight(), 4);
            assert!(a.commutes(&c.logical_x).unwrap() && a.commutes(&c.logical_z).unwrap());
        }
    }

    #[test]
    fn logicals_anticommute() {
        let c = perfect_code_513();
        assert!(!c.logical_x.commutes(&c.logical_z).unwrap());
    }

    #[test]
    fn distance_three_by_exhaustion() {
        assert_eq!(perfect_code_513().brute_force_distance(), Some(3));
    }

    #[test]
    fn generators_are_independent() {
        let c = perfect_code_513();
        let g = c.group();
        // 16 distinct elements means no product of a nonempty subset is I
        let mut bare: Vec<String> = g.iter().map(|p| p.to_string()).collect();
        bare.sort();
        bare.dedup();
        assert_eq!(bare.len(), 16);
    }
}
