use std::path::PathBuf;

use msd_decode::DecoderKind;
use msd_noisy::NoiseModel;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoder {
    Mle,
    Mld,
}

impl From<Decoder> for DecoderKind {
    fn from(d: Decoder) -> DecoderKind {
        match d {
            Decoder::Mle => DecoderKind::Mle,
            Decoder::Mld => DecoderKind::Mld,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Mirror of [`NoiseModel`] with serde defaults, so a config can name only
/// the rates it changes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub p_cz: f64,
    pub bias_zz: f64,
    pub p_1q_global: f64,
    pub p_1q_local: f64,
    pub p_prep: f64,
    pub p_meas: f64,
    pub p_move_z: f64,
    pub p_idle: f64,
    pub rescale: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseModel::default().into()
    }
}

impl From<NoiseModel> for NoiseConfig {
    fn from(m: NoiseModel) -> Self {
        NoiseConfig {
            p_cz: m.p_cz,
            bias_zz: m.bias_zz,
            p_1q_global: m.p_1q_global,
            p_1q_local: m.p_1q_local,
            p_prep: m.p_prep,
            p_meas: m.p_meas,
            p_move_z: m.p_move_z,
            p_idle: m.p_idle,
            rescale: m.rescale,
        }
    }
}

impl NoiseConfig {
    pub fn model(&self) -> NoiseModel {
        NoiseModel {
            p_cz: self.p_cz,
            bias_zz: self.bias_zz,
            p_1q_global: self.p_1q_global,
            p_1q_local: self.p_1q_local,
            p_prep: self.p_prep,
            p_meas: self.p_meas,
            p_move_z: self.p_move_z,
            p_idle: self.p_idle,
            rescale: self.rescale,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Kept fractions of the confidence ranking.
    pub fractions: Vec<f64>,
    /// Confidence-score cuts (logical gap for MLE, table fidelity for MLD).
    pub thresholds: Vec<f64>,
    /// Points of the injected-phase sweep over [0, 2π); 0 skips it.
    pub phi_points: usize,
    /// Uniform coherent input angles composed with the learned channel.
    pub thetas: Vec<f64>,
    /// Noise rescale factors, each learned from scratch.
    pub rescales: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            fractions: vec![1.0, 0.8, 0.6, 0.4, 0.3, 0.2, 0.1],
            thresholds: vec![],
            phi_points: 16,
            thetas: vec![],
            rescales: vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), format: Format::Json }
    }
}

fn default_distance() -> usize {
    3
}
fn default_shots() -> u64 {
    1_000_000
}
fn default_decoder() -> Decoder {
    Decoder::Mle
}
fn default_mld_samples() -> usize {
    10_000_000
}
fn default_posterior_samples() -> usize {
    100_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "default_distance")]
    pub distance: usize,
    /// Rz error on each of the five injected inputs.
    #[serde(default)]
    pub angles: [f64; 5],
    /// Total shots; every run splits them evenly over X, Y and Z.
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_decoder")]
    pub decoder: Decoder,
    #[serde(default = "default_mld_samples")]
    pub mld_samples: usize,
    #[serde(default = "default_posterior_samples")]
    pub posterior_samples: usize,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line values that replace config-file entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub distance: Option<usize>,
    pub rescale: Option<f64>,
    pub angles: Option<[f64; 5]>,
    pub decoder: Option<Decoder>,
    pub shots: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    /// A config with every default and the given seed.
    pub fn with_seed(seed: u64) -> ExperimentConfig {
        ExperimentConfig::resolve(None, &Overrides { seed: Some(seed), ..Default::default() }).expect("defaults are valid")
    }

    /// Parse an optional config file, apply overrides, fill defaults and
    /// validate. Missing `seed` is an error.
    pub fn resolve(text: Option<&str>, o: &Overrides) -> Result<ExperimentConfig> {
        let mut t: toml::Table = match text {
            Some(s) => s.parse().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?,
            None => toml::Table::new(),
        };
        let mut set = |path: &[&str], v: toml::Value| {
            let mut cur = &mut t;
            for k in &path[..path.len() - 1] {
                let e = cur.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
                cur = match e {
                    toml::Value::Table(tt) => tt,
                    other => {
                        *other = toml::Value::Table(toml::Table::new());
                        other.as_table_mut().unwrap()
                    }
                };
            }
            cur.insert(path[path.len() - 1].to_string(), v);
        };
        if let Some(s) = o.seed {
            let s = i64::try_from(s).map_err(|_| HarnessError::Invalid(vec![format!("seed must fit in 63 bits, got {s}")]))?;
            set(&["seed"], toml::Value::Integer(s));
        }
        if let Some(d) = o.distance {
            set(&["distance"], toml::Value::Integer(d as i64));
        }
        if let Some(r) = o.rescale {
            set(&["noise", "rescale"], toml::Value::Float(r));
        }
        if let Some(a) = o.angles {
            set(&["angles"], toml::Value::Array(a.iter().map(|&x| toml::Value::Float(x)).collect()));
        }
        if let Some(d) = o.decoder {
            set(&["decoder"], toml::Value::String(if d == Decoder::Mle { "mle" } else { "mld" }.into()));
        }
        if let Some(n) = o.shots {
            set(&["shots"], toml::Value::Integer(n as i64));
        }
        if let Some(p) = &o.out {
            set(&["output", "dir"], toml::Value::String(p.to_string_lossy().into_owned()));
        }
        if let Some(f) = o.format {
            set(&["output", "format"], toml::Value::String(if f == Format::Json { "json" } else { "csv" }.into()));
        }
        let c: ExperimentConfig = t.try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Shots in each of the three readout bases.
    pub fn shots_per_basis(&self) -> usize {
        self.shots.div_ceil(3) as usize
    }

    /// Every problem with the config, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        if self.seed > i64::MAX as u64 {
            p.push(format!("seed must fit in 63 bits, got {}", self.seed));
        }
        if !matches!(self.distance, 3 | 5) {
            p.push(format!("distance must be 3 or 5, got {}", self.distance));
        }
        if self.decoder == Decoder::Mld && self.distance == 5 {
            p.push("the lookup decoder is only available at distance 3".into());
        }
        if self.angles.iter().any(|a| !a.is_finite()) {
            p.push("angles must be finite".into());
        }
        if self.shots < 3 {
            p.push(format!("need at least one shot per basis, got {} in total", self.shots));
        }
        if self.decoder == Decoder::Mld && self.mld_samples == 0 {
            p.push("mld_samples must be positive".into());
        }
        if self.posterior_samples == 0 {
            p.push("posterior_samples must be positive".into());
        }
        if let Err(e) = self.noise.model().validate() {
            p.push(e.to_string());
        }
        for &q in &self.sweep.fractions {
            if !(q > 0.0 && q <= 1.0) {
                p.push(format!("sweep fraction {q} outside (0, 1]"));
            }
        }
        if self.sweep.thresholds.iter().chain(&self.sweep.thetas).any(|x| !x.is_finite()) {
            p.push("sweep thresholds and thetas must be finite".into());
        }
        for &r in &self.sweep.rescales {
            if !(r > 0.0 && r.is_finite()) {
                p.push(format!("sweep rescale {r} must be positive"));
            }
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Invalid(p))
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
