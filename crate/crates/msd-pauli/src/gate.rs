use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn index(self) -> usize {
        match self {
            Basis::X => 0,
            Basis::Y => 1,
            Basis::Z => 2,
        }
    }

    /// Symplectic bits `(x, z)` of the Pauli this basis measures.
    pub fn xz(self) -> (bool, bool) {
        match self {
            Basis::X => (true, false),
            Basis::Y => (true, true),
            Basis::Z => (false, true),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Basis::X => "X",
            Basis::Y => "Y",
            Basis::Z => "Z",
        };
        f.write_str(c)
    }
}

impl FromStr for Basis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "X" | "x" => Ok(Basis::X),
            "Y" | "y" => Ok(Basis::Y),
            "Z" | "z" => Ok(Basis::Z),
            other => Err(format!("unknown basis '{other}'")),
        }
    }
}

/// The gate set of the circuit IR.
///
/// `PrepMagic` and `Rz` are the only non-Clifford entries; they may appear on
/// injected qubits ahead of the first entangling layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    PrepZ,
    PrepMagic,
    Rz(f64),
    X,
    Y,
    Z,
    H,
    S,
    SDag,
    SqrtX,
    SqrtXDag,
    SqrtY,
    SqrtYDag,
    CZ,
    CNOT,
    MeasureX,
    MeasureY,
    MeasureZ,
}

impl Gate {
    pub const CLIFFORD_1Q: [Gate; 10] = [
        Gate::X,
        Gate::Y,
        Gate::Z,
        Gate::H,
        Gate::S,
        Gate::SDag,
        Gate::SqrtX,
        Gate::SqrtXDag,
        Gate::SqrtY,
        Gate::SqrtYDag,
    ];

    pub fn arity(self) -> usize {
        match self {
            Gate::CZ | Gate::CNOT => 2,
            _ => 1,
        }
    }

    pub fn is_clifford(self) -> bool {
        !matches!(self, Gate::PrepMagic | Gate::Rz(_))
    }

    pub fn is_unitary(self) -> bool {
        !matches!(self, Gate::PrepZ | Gate::PrepMagic) && self.measure_basis().is_none()
    }

    pub fn is_prep(self) -> bool {
        matches!(self, Gate::PrepZ | Gate::PrepMagic)
    }

    pub fn measure_basis(self) -> Option<Basis> {
        match self {
            Gate::MeasureX => Some(Basis::X),
            Gate::MeasureY => Some(Basis::Y),
            Gate::MeasureZ => Some(Basis::Z),
            _ => None,
        }
    }

    pub fn measure(basis: Basis) -> Gate {
        match basis {
            Basis::X => Gate::MeasureX,
            Basis::Y => Gate::MeasureY,
            Basis::Z => Gate::MeasureZ,
        }
    }

    /// Inverse of a unitary gate.
    pub fn inverse(self) -> Option<Gate> {
        Some(match self {
            Gate::Rz(t) => Gate::Rz(-t),
            Gate::S => Gate::SDag,
            Gate::SDag => Gate::S,
            Gate::SqrtX => Gate::SqrtXDag,
            Gate::SqrtXDag => Gate::SqrtX,
            Gate::SqrtY => Gate::SqrtYDag,
            Gate::SqrtYDag => Gate::SqrtY,
            g @ (Gate::X | Gate::Y | Gate::Z | Gate::H | Gate::CZ | Gate::CNOT) => g,
            _ => return None,
        })
    }

    /// Complex conjugate of the gate matrix (up to global phase).
    ///
    /// Transversal application on a self-dual code of length n ≡ 3 (mod 4)
    /// implements the conjugate logical gate, so the factory uses this to
    /// pick physical gates.
    pub fn complex_conjugate(self) -> Gate {
        match self {
            Gate::Rz(t) => Gate::Rz(-t),
            Gate::S => Gate::SDag,
            Gate::SDag => Gate::S,
            Gate::SqrtX => Gate::SqrtXDag,
            Gate::SqrtXDag => Gate::SqrtX,
            g => g,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::PrepZ => "PREP_Z",
            Gate::PrepMagic => "PREP_MAGIC",
            Gate::Rz(_) => "RZ",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::S => "S",
            Gate::SDag => "S_DAG",
            Gate::SqrtX => "SQRT_X",
            Gate::SqrtXDag => "SQRT_X_DAG",
            Gate::SqrtY => "SQRT_Y",
            Gate::SqrtYDag => "SQRT_Y_DAG",
            Gate::CZ => "CZ",
            Gate::CNOT => "CNOT",
            Gate::MeasureX => "M_X",
            Gate::MeasureY => "M_Y",
            Gate::MeasureZ => "M_Z",
        }
    }

    pub fn from_name(name: &str) -> Option<Gate> {
        if let Some(rest) = name.strip_prefix("RZ(") {
            let angle = rest.strip_suffix(')')?.parse().ok()?;
            return Some(Gate::Rz(angle));
        }
        Some(match name {
            "PREP_Z" => Gate::PrepZ,
            "PREP_MAGIC" => Gate::PrepMagic,
            "X" => Gate::X,
            "Y" => Gate::Y,
            "Z" => Gate::Z,
            "H" => Gate::H,
            "S" => Gate::S,
            "S_DAG" => Gate::SDag,
            "SQRT_X" => Gate::SqrtX,
            "SQRT_X_DAG" => Gate::SqrtXDag,
            "SQRT_Y" => Gate::SqrtY,
            "SQRT_Y_DAG" => Gate::SqrtYDag,
            "CZ" => Gate::CZ,
            "CNOT" => Gate::CNOT,
            "M_X" => Gate::MeasureX,
            "M_Y" => Gate::MeasureY,
            "M_Z" => Gate::MeasureZ,
            _ => return None,
        })
    }

    /// 2×2 matrix of a single-qubit unitary.
    pub fn matrix(self) -> Option<Mat2> {
        let c = Complex64::new;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = match self {
            Gate::X => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
            Gate::Y => [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
            Gate::Z => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
            Gate::H => [[c(h, 0.), c(h, 0.)], [c(h, 0.), c(-h, 0.)]],
            Gate::S => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 1.)]],
            Gate::SDag => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., -1.)]],
            Gate::SqrtX => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
            Gate::SqrtXDag => [[c(0.5, -0.5), c(0.5, 0.5)], [c(0.5, 0.5), c(0.5, -0.5)]],
            Gate::SqrtY => [[c(0.5, 0.5), c(-0.5, -0.5)], [c(0.5, 0.5), c(0.5, 0.5)]],
            Gate::SqrtYDag => [[c(0.5, -0.5), c(0.5, -0.5)], [c(-0.5, 0.5), c(0.5, -0.5)]],
            Gate::Rz(t) => [
                [Complex64::from_polar(1.0, -t / 2.0), c(0., 0.)],
                [c(0., 0.), Complex64::from_polar(1.0, t / 2.0)],
            ],
            _ => return None,
        };
        Some(m)
    }

    /// Conjugation `g P g†` of a single-qubit Pauli given by symplectic bits.
    /// Returns the new bits and whether the sign flips.
    pub fn conj1(self, x: bool, z: bool) -> Option<(bool, bool, bool)> {
        Some(match self {
            Gate::X => (x, z, z),
            Gate::Y => (x, z, x ^ z),
            Gate::Z => (x, z, x),
            Gate::H => (z, x, x & z),
            Gate::S => (x, z ^ x, x & z),
            Gate::SDag => (x, z ^ x, x & !z),
            Gate::SqrtX => (x ^ z, z, z & !x),
            Gate::SqrtXDag => (x ^ z, z, x & z),
            Gate::SqrtY => (z, x, x & !z),
            Gate::SqrtYDag => (z, x, z & !x),
            _ => return None,
        })
    }

    /// Conjugation of a two-qubit Pauli `(xa, za, xb, zb)` by CZ or CNOT
    /// (control a, target b).
    pub fn conj2(self, xa: bool, za: bool, xb: bool, zb: bool) -> Option<(bool, bool, bool, bool, bool)> {
        Some(match self {
            Gate::CZ => (xa, za ^ xb, xb, zb ^ xa, xa & xb & (za ^ zb)),
            Gate::CNOT => (xa, za ^ zb, xb ^ xa, zb, xa & zb & !(xb ^ za)),
            _ => return None,
        })
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Rz(t) => write!(f, "RZ({t})"),
            g => f.write_str(g.name()),
        }
    }
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat_dagger(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// Rotation by arccos(1/√3) about (−1, 1, 0)/√2, taking |0⟩ to the magic
/// state with Bloch vector (1, 1, 1)/√3.
pub fn magic_rotation() -> Mat2 {
    let theta = (1.0 / 3f64.sqrt()).acos();
    let (s, c) = (theta / 2.0).sin_cos();
    let (nx, ny) = (-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
    // cos(θ/2) I − i sin(θ/2) (nx X + ny Y)
    let i = Complex64::i();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let xm = [[zero, one], [one, zero]];
    let ym = [[zero, -i], [i, zero]];
    let mut m = [[zero; 2]; 2];
    for r in 0..2 {
        for col in 0..2 {
            let id = if r == col { c } else { 0.0 };
            m[r][col] = Complex64::new(id, 0.0) - i * s * (xm[r][col] * nx + ym[r][col] * ny);
        }
    }
    m
}
