use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use msd_noisy::distill::{accepted, ANCILLAS, ANCILLA_MASK, OUTPUT_BIT};
use msd_noisy::{DetectorModel, FactoryLayout, ShotRecord};
use rayon::prelude::*;

use crate::mld::MldTable;
use crate::mle::MleSolver;
use crate::{DecodeError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    Mle,
    Mld,
}

impl FromStr for DecoderKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mle" => Ok(DecoderKind::Mle),
            "mld" => Ok(DecoderKind::Mld),
            _ => Err(format!("unknown decoder `{s}` (expected mle or mld)")),
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Mle => "mle",
            DecoderKind::Mld => "mld",
        })
    }
}

/// Factory stage: ancilla-block detectors and the four ancilla logicals.
/// Tomography stage: every detector and all five logicals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Factory,
    Tomography,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    /// Predicted logical flips, at full observable positions.
    pub logical_flips: u32,
    /// Corrected logical outcome word (bit q = logical qubit q).
    pub outcome: u32,
    pub weight: f64,
    pub gap: Option<f64>,
    /// Factory stage only: corrected ancilla outcomes equal the accept pattern.
    pub accepted: bool,
}

/// Both stages for one shot plus its postselection score.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotDecode {
    pub factory: DecodeResult,
    pub tomography: DecodeResult,
    /// Ancilla flips from the factory stage, output flip from the
    /// tomography stage.
    pub correction: u32,
    /// Larger is more confident: the logical gap (MLE) or the sampled
    /// fidelity of the factory syndrome (MLD; 0 for unseen syndromes).
    pub score: f64,
    /// No ancilla-block detector fired.
    pub perfect: bool,
    /// The two stages agree on the ancilla flips.
    pub stages_agree: bool,
}

/// Two-stage decoder for a factory model.
#[derive(Clone, Debug)]
pub struct FactoryDecoder {
    factory: MleSolver,
    tomography: MleSolver,
    tables: Option<(MldTable, MldTable)>,
    expected: u32,
}

/// Per-syndrome answer, before the shot's own outcome is folded in.
#[derive(Clone, Debug)]
struct Decoded {
    flips: u32,
    weight: f64,
    gap: Option<f64>,
    score: f64,
}

impl FactoryDecoder {
    /// `expected` is the noiseless logical outcome word of the circuit the
    /// shots come from (the accept pattern for a reference factory).
    pub fn new(model: &DetectorModel, layout: &FactoryLayout, expected: u32) -> Result<FactoryDecoder> {
        let anc = layout.detector_mask(&ANCILLAS);
        Ok(FactoryDecoder {
            factory: MleSolver::new(model, anc, ANCILLA_MASK)?,
            tomography: MleSolver::new(model, model.detector_mask(), u32::MAX)?,
            tables: None,
            expected,
        })
    }

    /// Attach a lookup table built on the full model.
    pub fn with_table(mut self, table: &MldTable, layout: &FactoryLayout) -> FactoryDecoder {
        let anc = layout.detector_mask(&ANCILLAS);
        let fac = table.marginal(anc, ANCILLA_MASK);
        let all = (1u32 << table.num_observables) - 1;
        let tom = table.marginal(u128::MAX >> (128 - table.num_detectors.max(1)), all);
        self.tables = Some((fac, tom));
        self
    }

    pub fn factory_solver(&self) -> &MleSolver {
        &self.factory
    }

    pub fn tomography_solver(&self) -> &MleSolver {
        &self.tomography
    }

    fn solver(&self, stage: Stage) -> &MleSolver {
        match stage {
            Stage::Factory => &self.factory,
            Stage::Tomography => &self.tomography,
        }
    }

    fn decode_syndrome(&self, detectors: u128, stage: Stage, kind: DecoderKind) -> Result<Decoded> {
        let solver = self.solver(stage);
        let syn = solver.syndrome_of(detectors);
        let mle = |with_gap: bool| -> Result<Decoded> {
            if with_gap {
                let (s, gap) = solver.smle_gap(syn)?;
                Ok(Decoded { flips: solver.expand_logical(s.logical), weight: s.weight, gap: Some(gap), score: gap })
            } else {
                let s = solver.solve(syn)?;
                Ok(Decoded { flips: solver.expand_logical(s.logical), weight: s.weight, gap: None, score: 0.0 })
            }
        };
        match kind {
            DecoderKind::Mle => mle(stage == Stage::Factory),
            DecoderKind::Mld => {
                let (fac, tom) = self.tables.as_ref().ok_or(DecodeError::NoTable)?;
                let table = if stage == Stage::Factory { fac } else { tom };
                match table.lookup(syn) {
                    Some((pattern, fidelity)) => Ok(Decoded {
                        flips: solver.expand_logical(pattern),
                        weight: f64::NAN,
                        gap: None,
                        score: fidelity,
                    }),
                    None => Ok(Decoded { score: 0.0, ..mle(false)? }),
                }
            }
        }
    }

    fn result(&self, rec: &ShotRecord, stage: Stage, d: &Decoded) -> DecodeResult {
        let outcome = self.expected ^ rec.observables ^ d.flips;
        DecodeResult {
            logical_flips: d.flips,
            outcome,
            weight: d.weight,
            gap: d.gap,
            accepted: stage == Stage::Factory && accepted(outcome),
        }
    }

    /// Decode one stage of one shot.
    pub fn decode_stage(&self, rec: &ShotRecord, stage: Stage, kind: DecoderKind) -> Result<DecodeResult> {
        Ok(self.result(rec, stage, &self.decode_syndrome(rec.detectors, stage, kind)?))
    }

    fn combine(&self, rec: &ShotRecord, f: &Decoded, t: &Decoded) -> ShotDecode {
        let factory = self.result(rec, Stage::Factory, f);
        let tomography = self.result(rec, Stage::Tomography, t);
        ShotDecode {
            correction: (f.flips & ANCILLA_MASK) | (t.flips & OUTPUT_BIT),
            score: f.score,
            perfect: self.factory.syndrome_of(rec.detectors) == 0,
            stages_agree: (f.flips ^ t.flips) & ANCILLA_MASK == 0,
            factory,
            tomography,
        }
    }

    pub fn decode_shot(&self, rec: &ShotRecord, kind: DecoderKind) -> Result<ShotDecode> {
        let f = self.decode_syndrome(rec.detectors, Stage::Factory, kind)?;
        let t = self.decode_syndrome(rec.detectors, Stage::Tomography, kind)?;
        Ok(self.combine(rec, &f, &t))
    }

    /// Decode many shots, solving each distinct syndrome once, in parallel.
    pub fn decode_batch(&self, recs: &[ShotRecord], kind: DecoderKind) -> Result<Vec<ShotDecode>> {
        let anc = self.factory.det_mask();
        let memo = |keys: Vec<u128>, stage: Stage| -> Result<HashMap<u128, Decoded>> {
            keys.into_par_iter().map(|k| Ok((k, self.decode_syndrome(k, stage, kind)?))).collect()
        };
        let mut fk: Vec<u128> = recs.iter().map(|r| r.detectors & anc).collect();
        fk.sort_unstable();
        fk.dedup();
        let mut tk: Vec<u128> = recs.iter().map(|r| r.detectors).collect();
        tk.sort_unstable();
        tk.dedup();
        let fm = memo(fk, Stage::Factory)?;
        let tm = memo(tk, Stage::Tomography)?;
        Ok(recs.iter().map(|r| self.combine(r, &fm[&(r.detectors & anc)], &tm[&r.detectors])).collect())
    }
}

/// CSV rows `syndrome,outcome,weight,gap,accepted` for factory-stage results;
/// outcome bits are written logical qubit 0 first.
pub fn write_csv<W: Write>(mut w: W, rows: &[(ShotRecord, DecodeResult)]) -> io::Result<()> {
    writeln!(w, "syndrome,outcome,weight,gap,accepted")?;
    for (rec, r) in rows {
        let bits: String = (0..5).map(|q| if r.outcome >> q & 1 == 1 { '1' } else { '0' }).collect();
        let gap = match r.gap {
            Some(g) if g.is_infinite() => "inf".to_string(),
            Some(g) => format!("{g:.6}"),
            None => String::new(),
        };
        writeln!(w, "{:#x},{bits},{:.6},{gap},{}", rec.detectors, r.weight, r.accepted as u8)?;
    }
    Ok(())
}
