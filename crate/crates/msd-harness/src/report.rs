use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// A fidelity and its 68% credible interval. The interval and median come
/// from the posterior over the counts an equivalent direct experiment
/// would record; `fidelity` is the simulation's point estimate, which the
/// ball prior can leave outside a small-count interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub fidelity: f64,
    pub median: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Estimate {
    pub fn half_width(&self) -> f64 {
        (self.ci_hi - self.ci_lo) / 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisRates {
    pub basis: String,
    pub raw: f64,
    pub corrected: f64,
    pub perfect: f64,
    pub perfect_fraction: f64,
}

/// Logical expectation of an equatorial input (cos φ, sin φ, 0) read out
/// in one basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiPoint {
    pub phi: f64,
    pub basis: String,
    pub corrected: f64,
    pub perfect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectionSection {
    pub shots_per_basis: u64,
    pub raw: Estimate,
    pub corrected: Estimate,
    pub perfect: Estimate,
    /// Share of shots with no detector firing, averaged over bases.
    pub perfect_fraction: f64,
    pub bases: Vec<BasisRates>,
    pub phi_sweep: Vec<PhiPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Postselection rule, e.g. `all`, `fraction:0.4`, `perfect`.
    pub cut: String,
    /// Kept fraction times factory acceptance.
    pub accepted_fraction: f64,
    pub acceptance: f64,
    pub fidelity: f64,
    pub median: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnglePoint {
    pub theta: f64,
    pub input_fidelity: f64,
    pub ideal_fidelity: f64,
    pub ideal_acceptance: f64,
    /// With the learned channel, no stabilizer postselection.
    pub fidelity: f64,
    pub acceptance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescalePoint {
    pub rescale: f64,
    pub injected: Estimate,
    /// No stabilizer postselection.
    pub distilled: Estimate,
    pub perfect: Estimate,
    pub acceptance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorySection {
    pub decoder: String,
    pub shots_per_basis: u64,
    pub ideal_acceptance: f64,
    pub ideal_fidelity: f64,
    /// Factory acceptance without stabilizer postselection.
    pub acceptance: f64,
    /// Share of shots whose two decoding stages agree on the ancillas.
    pub stage_agreement: f64,
    /// Error-corrected injected fidelity for comparison.
    pub injected: Estimate,
    pub curve: Vec<CurvePoint>,
    pub angle_sweep: Vec<AnglePoint>,
    pub rescale_sweep: Vec<RescalePoint>,
    /// Rescale where distillation without stabilizer postselection starts
    /// to beat injection, by linear interpolation over the sweep.
    pub crossing: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub provenance: Provenance,
    pub config: ExperimentConfig,
    pub injection: Option<InjectionSection>,
    pub factory: Option<FactorySection>,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Report {
        Report {
            provenance: Provenance {
                tool: "msd".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                config_hash: config.hash(),
                seed: config.seed,
            },
            config: config.clone(),
            injection: None,
            factory: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Report> {
        serde_json::from_str(s)
    }
}
