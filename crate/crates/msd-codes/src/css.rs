use msd_pauli::Basis;

use crate::gf2;
use crate::CodeError;

/// A CSS code with checks and logicals stored as qubit-support masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssCode {
    pub label: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub x_checks: Vec<u64>,
    pub z_checks: Vec<u64>,
    pub logical_x: Vec<u64>,
    pub logical_z: Vec<u64>,
}

fn mask(qubits: &[usize]) -> u64 {
    qubits.iter().fold(0, |m, &q| m | 1 << q)
}

pub fn support(m: u64) -> Vec<usize> {
    (0..64).filter(|q| m >> q & 1 == 1).collect()
}

// d=3: S0 = Z0Z1Z2Z3, S1 = Z1Z2Z4Z5, S2 = Z2Z3Z4Z6 with X mirrors.
const D3_PLAQUETTES: [&[usize]; 3] = [&[0, 1, 2, 3], &[1, 2, 4, 5], &[2, 3, 4, 6]];
const D3_LOGICAL: &[usize] = &[0, 1, 5];

// d=5 labelling chosen so the published 24-step row reduction is valid:
// seven weight-4 plaquettes and one weight-8 plaquette.
const D5_PLAQUETTES: [&[usize]; 8] = [
    &[0, 1, 2, 3],
    &[0, 2, 4, 5],
    &[1, 3, 6, 7],
    &[4, 5, 8, 9],
    &[10, 11, 12, 14],
    &[10, 12, 13, 16],
    &[12, 14, 15, 16],
    &[0, 1, 4, 6, 9, 10, 11, 13],
];
const D5_LOGICAL: &[usize] = &[6, 7, 10, 11, 13];

/// The triangular color code of distance 3 ([[7,1,3]]) or 5 ([[17,1,5]]).
pub fn color_code(distance: usize) -> Result<CssCode, CodeError> {
    let (n, plaquettes, logical): (usize, &[&[usize]], &[usize]) = match distance {
        3 => (7, &D3_PLAQUETTES, D3_LOGICAL),
        5 => (17, &D5_PLAQUETTES, D5_LOGICAL),
        d => return Err(CodeError::UnsupportedDistance(d)),
    };
    let checks: Vec<u64> = plaquettes.iter().map(|p| mask(p)).collect();
    Ok(CssCode {
        label: format!("color-{distance}"),
        n,
        k: 1,
        d: distance,
        x_checks: checks.clone(),
        z_checks: checks,
        logical_x: vec![mask(logical)],
        logical_z: vec![mask(logical)],
    })
}

/// One bare qubit, for unencoded (d=1) runs.
pub fn trivial_code() -> CssCode {
    CssCode {
        label: "bare".into(),
        n: 1,
        k: 1,
        d: 1,
        x_checks: vec![],
        z_checks: vec![],
        logical_x: vec![1],
        logical_z: vec![1],
    }
}

impl CssCode {
    pub fn is_self_dual(&self) -> bool {
        self.x_checks == self.z_checks && self.logical_x == self.logical_z
    }

    /// Minimum weight of a Z-type (`z = true`) or X-type logical operator.
    fn type_distance(&self, z: bool) -> Option<usize> {
        let (commute_with, stabs) = if z { (&self.x_checks, &self.z_checks) } else { (&self.z_checks, &self.x_checks) };
        let sb = gf2::basis(stabs);
        (1..=self.n).find(|&w| {
            gf2::masks_of_weight(self.n, w)
                .any(|v| commute_with.iter().all(|&c| !gf2::parity(c & v)) && gf2::reduce(&sb, v) != 0)
        })
    }

    /// Brute-force code distance (minimum over X- and Z-type logicals).
    pub fn brute_force_distance(&self) -> Option<usize> {
        match (self.type_distance(true), self.type_distance(false)) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Rows of the check matrix for a readout basis (Y only for self-dual codes).
    pub fn checks_for(&self, basis: Basis) -> Result<&[u64], CodeError> {
        match basis {
            Basis::X => Ok(&self.x_checks),
            Basis::Z => Ok(&self.z_checks),
            Basis::Y if self.is_self_dual() => Ok(&self.z_checks),
            Basis::Y => Err(CodeError::NotSelfDual),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeReport {
    pub n: usize,
    pub k: usize,
    pub distance: usize,
    pub x_distance: usize,
    pub z_distance: usize,
}

/// Check every CSS invariant and compute the distance by brute force.
pub fn validate_code(code: &CssCode) -> Result<CodeReport, CodeError> {
    if code.n > 64 {
        return Err(CodeError::TooLarge(code.n));
    }
    let all = code.x_checks.iter().chain(&code.z_checks).chain(&code.logical_x).chain(&code.logical_z);
    let full = if code.n == 64 { u64::MAX } else { (1u64 << code.n) - 1 };
    for &m in all {
        if m & !full != 0 {
            return Err(CodeError::QubitOutOfRange { qubit: 63 - (m & !full).leading_zeros() as usize, n: code.n });
        }
    }
    for (i, &x) in code.x_checks.iter().enumerate() {
        for (j, &z) in code.z_checks.iter().enumerate() {
            if gf2::parity(x & z) {
                return Err(CodeError::CssViolation { x: i, z: j });
            }
        }
    }
    let actual_k = code.n - gf2::rank(&code.x_checks) - gf2::rank(&code.z_checks);
    if actual_k != code.k || code.logical_x.len() != code.k || code.logical_z.len() != code.k {
        return Err(CodeError::RankMismatch { claimed: code.k, actual: actual_k });
    }
    for (i, &lx) in code.logical_x.iter().enumerate() {
        if code.z_checks.iter().any(|&z| gf2::parity(z & lx)) {
            return Err(CodeError::LogicalNotCentral { kind: 'X', index: i });
        }
        if gf2::in_span(&code.x_checks, lx) {
            return Err(CodeError::LogicalTrivial { kind: 'X', index: i });
        }
        for (j, &lz) in code.logical_z.iter().enumerate() {
            if gf2::parity(lx & lz) != (i == j) {
                return Err(CodeError::LogicalPairing(i.min(j)));
            }
        }
    }
    for (i, &lz) in code.logical_z.iter().enumerate() {
        if code.x_checks.iter().any(|&x| gf2::parity(x & lz)) {
            return Err(CodeError::LogicalNotCentral { kind: 'Z', index: i });
        }
        if gf2::in_span(&code.z_checks, lz) {
            return Err(CodeError::LogicalTrivial { kind: 'Z', index: i });
        }
    }
    let z_distance = code.type_distance(true).unwrap_or(0);
    let x_distance = code.type_distance(false).unwrap_or(0);
    let distance = z_distance.min(x_distance);
    if distance != code.d {
        return Err(CodeError::DistanceMismatch { claimed: code.d, actual: distance });
    }
    Ok(CodeReport { n: code.n, k: code.k, distance, x_distance, z_distance })
}

/// Which parities a transversal readout in one basis yields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementSpec {
    pub basis: Basis,
    /// Indices into the code's check list for this basis.
    pub detector_checks: Vec<usize>,
    /// Qubit support of each detector parity.
    pub detectors: Vec<u64>,
    /// Whether the detector operator is −(product of single-qubit basis
    /// operators); its noiseless parity is then odd.
    pub detector_negative: Vec<bool>,
    /// Support of the logical operator read in this basis.
    pub logical: u64,
    pub logical_negative: bool,
}

/// Detector set for a transversal readout of logical qubit 0.
///
/// For Y on a self-dual code the detectors are the products S_x·S_z of
/// paired plaquettes, i.e. the product of Y over the plaquette, and the
/// logical is iX̄Z̄ = i(−i)^w Π Y over the logical support of weight w.
pub fn measurement_spec(code: &CssCode, basis: Basis) -> Result<MeasurementSpec, CodeError> {
    let checks = code.checks_for(basis)?.to_vec();
    let (logical, logical_negative, detector_negative) = match basis {
        Basis::X => (code.logical_x[0], false, vec![false; checks.len()]),
        Basis::Z => (code.logical_z[0], false, vec![false; checks.len()]),
        Basis::Y => {
            let w = code.logical_z[0].count_ones();
            // X_S Z_S = (−i)^{|S|} Π Y
            let neg = checks.iter().map(|c| c.count_ones() % 4 == 2).collect();
            (code.logical_z[0], w % 4 == 3, neg)
        }
    };
    Ok(MeasurementSpec {
        basis,
        detector_checks: (0..checks.len()).collect(),
        detectors: checks,
        detector_negative,
        logical,
        logical_negative,
    })
}
