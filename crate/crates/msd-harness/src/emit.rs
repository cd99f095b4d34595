use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::Format;
use crate::report::Report;
use crate::{HarnessError, Result};

pub const CURVE_HEADER: &str = "accepted_fraction,fidelity,ci_lo,ci_hi";

fn write(dir: &Path, name: &str, body: &str, out: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
    out.push(path);
    Ok(())
}

fn csv_files(r: &Report) -> Vec<(&'static str, String)> {
    let mut files = Vec::new();
    if let Some(inj) = &r.injection {
        let mut s = String::from("estimate,fidelity,ci_lo,ci_hi\n");
        for (name, e) in [("raw", inj.raw), ("corrected", inj.corrected), ("perfect", inj.perfect)] {
            let _ = writeln!(s, "{name},{},{},{}", e.fidelity, e.ci_lo, e.ci_hi);
        }
        files.push(("injection.csv", s));
        if !inj.phi_sweep.is_empty() {
            let mut s = String::from("phi,basis,corrected,perfect\n");
            for p in &inj.phi_sweep {
                let _ = writeln!(s, "{},{},{},{}", p.phi, p.basis, p.corrected, p.perfect);
            }
            files.push(("phi_sweep.csv", s));
        }
    }
    if let Some(f) = &r.factory {
        let mut s = format!("{CURVE_HEADER}\n");
        for p in &f.curve {
            let _ = writeln!(s, "{},{},{},{}", p.accepted_fraction, p.fidelity, p.ci_lo, p.ci_hi);
        }
        files.push(("curve.csv", s));
        if !f.angle_sweep.is_empty() {
            let mut s = String::from("theta,input_fidelity,ideal_fidelity,ideal_acceptance,fidelity,acceptance\n");
            for p in &f.angle_sweep {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    p.theta, p.input_fidelity, p.ideal_fidelity, p.ideal_acceptance, p.fidelity, p.acceptance
                );
            }
            files.push(("angle_sweep.csv", s));
        }
        if !f.rescale_sweep.is_empty() {
            let mut s = String::from("rescale,series,fidelity,ci_lo,ci_hi\n");
            for p in &f.rescale_sweep {
                for (name, e) in [("injected", p.injected), ("distilled", p.distilled), ("perfect", p.perfect)] {
                    let _ = writeln!(s, "{},{name},{},{},{}", p.rescale, e.fidelity, e.ci_lo, e.ci_hi);
                }
            }
            files.push(("rescale_sweep.csv", s));
        }
    }
    files
}

/// Write the report under `dir`. JSON is a single `report.json`; CSV is one
/// file per curve plus `config.toml` echoing the resolved config and its
/// hash. Returns the paths written, in order.
pub fn emit(report: &Report, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.display().to_string(), source })?;
    let mut out = Vec::new();
    match format {
        Format::Json => write(dir, "report.json", &report.to_json(), &mut out)?,
        Format::Csv => {
            let p = &report.provenance;
            let head = format!(
                "# {} {} config_hash = {} seed = {}\n",
                p.tool, p.version, p.config_hash, p.seed
            );
            write(dir, "config.toml", &(head + &report.config.to_toml()), &mut out)?;
            for (name, body) in csv_files(report) {
                write(dir, name, &body, &mut out)?;
            }
        }
    }
    Ok(out)
}
