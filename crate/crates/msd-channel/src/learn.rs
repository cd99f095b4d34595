use std::collections::BTreeMap;

use msd_codes::CssCode;
use msd_decode::{build_mld, DecoderKind, FactoryDecoder, ShotDecode};
use msd_noisy::{build_reference_factory, instrument, noiseless_record, sample_map, NoiseModel, ShotRecord};
use msd_pauli::Basis;
use serde::{Deserialize, Serialize};

use crate::{basis_char, parse_basis, word_string, ChannelError, Result};

/// Which shots a stratum keeps, on top of the factory's own acceptance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum Cut {
    /// No stabilizer postselection.
    All,
    /// Only shots where no ancilla-block detector fired.
    Perfect,
    /// Shots whose confidence score is at least the threshold.
    Score(f64),
    /// The most confident fraction of shots (ties broken by shot order).
    Fraction(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub cut: Cut,
    pub kept: u64,
    /// Tally of 5-bit logical flip patterns over the kept shots.
    pub counts: Vec<u64>,
}

impl Stratum {
    pub fn distribution(&self) -> Result<[f64; 32]> {
        if self.kept == 0 {
            return Err(ChannelError::Counts(format!("stratum {:?} kept no shots", self.cut)));
        }
        let mut d = [0.0; 32];
        for (x, &c) in d.iter_mut().zip(&self.counts) {
            *x = c as f64 / self.kept as f64;
        }
        Ok(d)
    }

    /// Probability of any logical flip.
    pub fn non_identity_mass(&self) -> f64 {
        1.0 - self.counts[0] as f64 / self.kept.max(1) as f64
    }

    /// Probability that some ancilla bit flips.
    pub fn syndrome_flip_mass(&self) -> f64 {
        let hit: u64 = self
            .counts
            .iter()
            .enumerate()
            .filter(|&(w, _)| w as u32 & msd_noisy::distill::ANCILLA_MASK != 0)
            .map(|(_, &c)| c)
            .sum();
        hit as f64 / self.kept.max(1) as f64
    }
}

/// Learned flip channel for one output readout basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisChannel {
    #[serde(with = "basis_serde")]
    pub basis: Basis,
    pub shots: u64,
    /// Noiseless logical outcome word of the reference run.
    pub offset: u32,
    /// Shots on which the two decoding stages agree on the ancilla flips.
    pub stages_agree: u64,
    pub strata: Vec<Stratum>,
}

impl BasisChannel {
    pub fn kept_fraction(&self, stratum: usize) -> Result<f64> {
        let s = self.strata.get(stratum).ok_or(ChannelError::NoStratum(stratum))?;
        Ok(s.kept as f64 / self.shots.max(1) as f64)
    }
}

mod basis_serde {
    use msd_pauli::Basis;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &Basis, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::basis_char(*b).to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Basis, D::Error> {
        let s = String::deserialize(d)?;
        crate::parse_basis(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LogicalChannel {
    pub bases: Vec<BasisChannel>,
}

impl LogicalChannel {
    pub fn basis(&self, b: Basis) -> Result<&BasisChannel> {
        self.bases.iter().find(|c| c.basis == b).ok_or(ChannelError::MissingBasis(b))
    }

    /// `basis → {pattern: probability}` for one stratum, patterns written
    /// logical qubit 0 first; zero entries are left out.
    pub fn distribution_json(&self, stratum: usize) -> Result<String> {
        let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for c in &self.bases {
            let s = c.strata.get(stratum).ok_or(ChannelError::NoStratum(stratum))?;
            let d = s.distribution()?;
            let m = (0..32u32).filter(|&w| d[w as usize] > 0.0).map(|w| (word_string(w), d[w as usize])).collect();
            out.insert(basis_char(c.basis).to_string(), m);
        }
        serde_json::to_string_pretty(&out).map_err(|e| ChannelError::Parse(e.to_string()))
    }

    pub fn from_distribution_json(text: &str) -> Result<BTreeMap<Basis, [f64; 32]>> {
        let raw: BTreeMap<String, BTreeMap<String, f64>> =
            serde_json::from_str(text).map_err(|e| ChannelError::Parse(e.to_string()))?;
        let mut out = BTreeMap::new();
        for (b, m) in raw {
            let mut d = [0.0; 32];
            for (w, p) in m {
                d[crate::parse_word(&w)? as usize] = p;
            }
            out.insert(parse_basis(&b)?, d);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnOptions {
    pub shots: usize,
    pub seed: u64,
    pub decoder: DecoderKind,
    /// Samples for the lookup table when `decoder` is MLD.
    pub mld_samples: usize,
    pub cuts: Vec<Cut>,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            shots: 1_000_000,
            seed: 0,
            decoder: DecoderKind::Mle,
            mld_samples: 10_000_000,
            cuts: vec![Cut::All, Cut::Perfect],
        }
    }
}

/// Per-shot summary kept after decoding.
#[derive(Clone, Copy, Debug)]
struct Compact {
    score: f64,
    perfect: bool,
    agree: bool,
    flips: u8,
}

fn compact(recs: &[ShotRecord], decoded: &[ShotDecode]) -> Vec<Compact> {
    recs.iter()
        .zip(decoded)
        .map(|(r, d)| Compact {
            score: d.score,
            perfect: d.perfect,
            agree: d.stages_agree,
            flips: ((r.observables ^ d.correction) & 0b11111) as u8,
        })
        .collect()
}

fn tally(shots: &[Compact], keep: impl Iterator<Item = usize>, cut: Cut) -> Stratum {
    let mut counts = vec![0u64; 32];
    let mut kept = 0;
    for i in keep {
        counts[shots[i].flips as usize] += 1;
        kept += 1;
    }
    Stratum { cut, kept, counts }
}

fn strata(shots: &[Compact], cuts: &[Cut]) -> Vec<Stratum> {
    let n = shots.len();
    let mut order: Option<Vec<usize>> = None;
    cuts.iter()
        .map(|&cut| match cut {
            Cut::All => tally(shots, 0..n, cut),
            Cut::Perfect => tally(shots, (0..n).filter(|&i| shots[i].perfect), cut),
            Cut::Score(t) => tally(shots, (0..n).filter(|&i| shots[i].score >= t), cut),
            Cut::Fraction(q) => {
                let order = order.get_or_insert_with(|| {
                    let mut o: Vec<usize> = (0..n).collect();
                    o.sort_by(|&a, &b| shots[b].score.total_cmp(&shots[a].score).then(a.cmp(&b)));
                    o
                });
                let k = ((q.clamp(0.0, 1.0) * n as f64).ceil() as usize).min(n);
                tally(shots, order[..k].iter().copied(), cut)
            }
        })
        .collect()
}

/// Sample the reference factory read out in `basis`, decode both stages
/// and tally the residual logical flips per stratum.
pub fn learn_channel(code: &CssCode, noise: &NoiseModel, basis: Basis, opts: &LearnOptions) -> Result<BasisChannel> {
    let (circuit, layout) = build_reference_factory(code, basis)?;
    let (_, obs) = noiseless_record(&circuit)?;
    let offset = obs ^ layout.negative_observables;
    let model = instrument(&circuit, noise)?;
    let mut decoder = FactoryDecoder::new(&model, &layout, offset)?;
    if opts.decoder == DecoderKind::Mld {
        let table = build_mld(&model, opts.mld_samples, opts.seed ^ 0x6d6c_645f_7461_626c)?;
        decoder = decoder.with_table(&table, &layout);
    }
    let parts = sample_map(&model, opts.shots, opts.seed, |recs| -> Result<Vec<Compact>> {
        Ok(compact(recs, &decoder.decode_batch(recs, opts.decoder)?))
    });
    let mut shots = Vec::with_capacity(opts.shots);
    for p in parts {
        shots.extend(p?);
    }
    Ok(BasisChannel {
        basis,
        shots: shots.len() as u64,
        offset,
        stages_agree: shots.iter().filter(|s| s.agree).count() as u64,
        strata: strata(&shots, &opts.cuts),
    })
}

/// Learn all three bases with independent seeds.
pub fn learn_factory(code: &CssCode, noise: &NoiseModel, opts: &LearnOptions) -> Result<LogicalChannel> {
    let mut bases = Vec::new();
    for b in Basis::ALL {
        let o = LearnOptions { seed: basis_seed(opts.seed, b), ..opts.clone() };
        bases.push(learn_channel(code, noise, b, &o)?);
    }
    Ok(LogicalChannel { bases })
}

pub(crate) fn basis_seed(seed: u64, b: Basis) -> u64 {
    seed.wrapping_add((b.index() as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shot(score: f64, perfect: bool, flips: u8) -> Compact {
        Compact { score, perfect, agree: true, flips }
    }

    #[test]
    fn cuts_select_the_expected_shots() {
        let shots = vec![shot(1.0, true, 0), shot(3.0, false, 2), shot(2.0, false, 1), shot(2.0, true, 0)];
        let s = strata(&shots, &[Cut::All, Cut::Perfect, Cut::Score(2.0), Cut::Fraction(0.5)]);
        assert_eq!(s[0].kept, 4);
        assert_eq!((s[1].kept, s[1].counts[0]), (2, 2));
        assert_eq!((s[2].kept, s[2].counts[1], s[2].counts[2]), (3, 1, 1));
        // top two by score: 3.0 then the earlier of the 2.0 ties
        assert_eq!((s[3].kept, s[3].counts[2], s[3].counts[1]), (2, 1, 1));
    }

    #[test]
    fn json_round_trip() {
        let c = LogicalChannel {
            bases: vec![BasisChannel {
                basis: Basis::Y,
                shots: 4,
                offset: 0b11001,
                stages_agree: 4,
                strata: vec![Stratum { cut: Cut::Score(1.5), kept: 4, counts: {
                    let mut v = vec![0; 32];
                    v[0] = 3;
                    v[0b00010] = 1;
                    v
                } }],
            }],
        };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<LogicalChannel>(&text).unwrap(), c);
        let d = LogicalChannel::from_distribution_json(&c.distribution_json(0).unwrap()).unwrap();
        assert_eq!(d[&Basis::Y][0], 0.75);
        assert_eq!(d[&Basis::Y][0b00010], 0.25);
        assert!(c.distribution_json(0).unwrap().contains("\"01000\": 0.25"));
    }
}
