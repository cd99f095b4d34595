use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use msd_channel::{ideal_channel, learn_channel, reference_offset, Cut, LearnOptions};
use msd_codes::{color_code, validate_code, CssCode};
use msd_decode::{build_mld, write_csv, DecoderKind, FactoryDecoder};
use msd_harness::{emit, run_factory, run_injection, Decoder, ExperimentConfig, Format, Overrides, Report};
use msd_noisy::distill::ACCEPT_WORD;
use msd_noisy::{build_reference_factory, instrument, noiseless_record, sample};
use msd_pauli::Basis;
use msd_synth::{
    circuit_from_rops, derive_column_ops, reduce, verify_injection, InjectedInput, ReductionMatrix, RowOpSequence,
    KNOWN_D3_ROPS, KNOWN_D5_ROPS,
};

/// Worker threads for the parallel samplers and decoders.
const THREADS_ENV: &str = "MSD_THREADS";

#[derive(Parser)]
#[command(name = "msd", version, about = "Logical magic-state distillation: simulate, decode, learn, compose")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize a state-injection encoder and print it in circuit text form.
    Synth(SynthArgs),
    /// Check the config and the built-in invariants.
    Validate(Common),
    /// Injection-only run: raw, corrected and perfect-stabilizer fidelities.
    Inject(Common),
    /// Full factory: learn, compose, sweep.
    Factory(Common),
    /// Sample reference-factory shots and write the factory-stage decodes.
    Decode(DecodeArgs),
    /// Time sampling and decoding.
    Bench(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Mle,
    Mld,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    X,
    Y,
    Z,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(usize))]
    distance: Option<usize>,
    #[arg(long)]
    rescale: Option<f64>,
    /// Five comma-separated Rz angles on the injected inputs.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    angles: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    decoder: Option<DecoderArg>,
    /// Total shots, split evenly over X, Y and Z.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 3)]
    distance: usize,
    /// Code in check-matrix text form instead of a built-in color code.
    #[arg(long)]
    code: Option<PathBuf>,
    /// Use the known-good row-op sequence instead of searching.
    #[arg(long)]
    known: bool,
    /// Write `encoder.txt` here instead of printing.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "z")]
    basis: BasisArg,
}

impl Common {
    fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let text = match &self.config {
            Some(p) => Some(fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
            None => None,
        };
        let angles = match &self.angles {
            None => None,
            Some(a) => Some(<[f64; 5]>::try_from(a.as_slice()).map_err(|_| anyhow::anyhow!("--angles needs 5 values, got {}", a.len()))?),
        };
        let o = Overrides {
            seed: self.seed,
            distance: self.distance,
            rescale: self.rescale,
            angles,
            decoder: self.decoder.map(|d| match d {
                DecoderArg::Mle => Decoder::Mle,
                DecoderArg::Mld => Decoder::Mld,
            }),
            shots: self.shots,
            out: self.out.clone(),
            format: self.format.map(|f| match f {
                FormatArg::Json => Format::Json,
                FormatArg::Csv => Format::Csv,
            }),
        };
        Ok(ExperimentConfig::resolve(text.as_deref(), &o)?)
    }
}

fn basis_of(b: BasisArg) -> Basis {
    match b {
        BasisArg::X => Basis::X,
        BasisArg::Y => Basis::Y,
        BasisArg::Z => Basis::Z,
    }
}

fn write_report(r: &Report, c: &ExperimentConfig) -> anyhow::Result<()> {
    for p in emit(r, c.output.format, &c.output.dir)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn synth(a: &SynthArgs) -> anyhow::Result<()> {
    let code: CssCode = match &a.code {
        Some(p) => CssCode::from_text(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => color_code(a.distance)?,
    };
    let (ops, fin) = if a.known {
        let text = match (a.code.is_some(), a.distance) {
            (false, 3) => KNOWN_D3_ROPS,
            (false, 5) => KNOWN_D5_ROPS,
            _ => bail!("known sequences exist only for the built-in d=3 and d=5 codes"),
        };
        let ops = RowOpSequence::parse(text)?;
        let mut fin = ops.replay(&ReductionMatrix::from_code(&code)?)?;
        for c in derive_column_ops(&fin).context("sequence does not reduce the code")? {
            fin.apply_column_op(c)?;
        }
        (ops, fin)
    } else {
        let r = reduce(&code)?;
        (r.ops, r.final_matrix)
    };
    let circuit = circuit_from_rops(&ops, &fin, InjectedInput::Magic { theta: 0.0 })?;
    let rep = verify_injection(&circuit, &code)?;
    eprintln!(
        "{} row ops in {} layers; injected qubit {}; {} stabilizers verified",
        ops.len(),
        ops.depth(),
        rep.injected_qubit,
        rep.stabilizers_checked
    );
    eprintln!("row ops: {}", ops.ops().iter().map(|o| o.to_string()).collect::<Vec<_>>().join(", "));
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let p = dir.join("encoder.txt");
            fs::write(&p, circuit.to_text())?;
            println!("wrote {}", p.display());
        }
        None => print!("{}", circuit.to_text()),
    }
    Ok(())
}

fn validate(c: &ExperimentConfig) -> anyhow::Result<bool> {
    let mut ok = true;
    let mut check = |name: &str, r: anyhow::Result<String>| {
        match r {
            Ok(msg) => println!("ok    {name}: {msg}"),
            Err(e) => {
                ok = false;
                println!("FAIL  {name}: {e:#}");
            }
        }
    };
    let code = color_code(c.distance)?;
    check(
        "code",
        validate_code(&code).map_err(Into::into).map(|r| format!("[[{}, {}, {}]]", r.n, r.k, r.distance)),
    );
    check(
        "encoder",
        (|| {
            let r = reduce(&code)?;
            let circ = circuit_from_rops(&r.ops, &r.final_matrix, InjectedInput::Magic { theta: 0.0 })?;
            verify_injection(&circ, &code)?;
            Ok(format!("{} layers, {} gates", r.ops.depth(), r.ops.len()))
        })(),
    );
    for b in Basis::ALL {
        check(
            &format!("reference offset {b}"),
            (|| {
                let o = reference_offset(b)?;
                if o != ACCEPT_WORD {
                    bail!("{o:05b} differs from the accept pattern {ACCEPT_WORD:05b}");
                }
                Ok(format!("{o:05b}"))
            })(),
        );
    }
    check(
        "ideal factory",
        (|| {
            let ch = ideal_channel(&[0.0; 5])?;
            if (ch.acceptance() - 1.0 / 6.0).abs() > 1e-9 || (ch.output_fidelity() - 1.0).abs() > 1e-9 {
                bail!("acceptance {} fidelity {}", ch.acceptance(), ch.output_fidelity());
            }
            let at = ideal_channel(&c.angles)?;
            Ok(format!("acceptance 1/6; at the configured angles {:.6}, F = {:.6}", at.acceptance(), at.output_fidelity()))
        })(),
    );
    check(
        "noise model",
        (|| {
            let (circ, _) = build_reference_factory(&code, Basis::Z)?;
            let m = instrument(&circ, &c.noise.model())?;
            Ok(format!("{} detectors, {} mechanisms", m.num_detectors, m.num_mechanisms()))
        })(),
    );
    Ok(ok)
}

fn decode(a: &DecodeArgs) -> anyhow::Result<()> {
    let c = a.common.resolve()?;
    let basis = basis_of(a.basis);
    let code = color_code(c.distance)?;
    let (circ, layout) = build_reference_factory(&code, basis)?;
    let (_, obs) = noiseless_record(&circ)?;
    let model = instrument(&circ, &c.noise.model())?;
    let kind = DecoderKind::from(c.decoder);
    let mut dec = FactoryDecoder::new(&model, &layout, obs ^ layout.negative_observables)?;
    if kind == DecoderKind::Mld {
        dec = dec.with_table(&build_mld(&model, c.mld_samples, c.seed ^ 0x6d6c_6400)?, &layout);
    }
    let recs = sample(&model, c.shots_per_basis(), c.seed);
    let out = dec.decode_batch(&recs, kind)?;
    let accepted = out.iter().filter(|d| d.factory.accepted).count();
    let perfect = out.iter().filter(|d| d.perfect).count();
    let rows: Vec<_> = recs.into_iter().zip(out).map(|(r, d)| (r, d.factory)).collect();
    fs::create_dir_all(&c.output.dir)?;
    let p = c.output.dir.join("decode.csv");
    write_csv(std::io::BufWriter::new(fs::File::create(&p)?), &rows)?;
    let n = rows.len() as f64;
    println!(
        "{} shots in the {basis} basis: accepted {:.4}, perfect {:.4}",
        rows.len(),
        accepted as f64 / n,
        perfect as f64 / n
    );
    println!("wrote {}", p.display());
    Ok(())
}

fn bench(c: &ExperimentConfig) -> anyhow::Result<()> {
    let code = color_code(c.distance)?;
    let n = c.shots_per_basis();
    let (circ, _) = build_reference_factory(&code, Basis::Z)?;
    let t = Instant::now();
    let model = instrument(&circ, &c.noise.model())?;
    println!("instrument   {:>10.3} s  ({} mechanisms)", t.elapsed().as_secs_f64(), model.num_mechanisms());
    let t = Instant::now();
    let recs = sample(&model, n, c.seed);
    let s = t.elapsed().as_secs_f64();
    println!("sample       {:>10.3} s  ({:.3e} shots/s)", s, recs.len() as f64 / s);
    let t = Instant::now();
    let opts = LearnOptions {
        shots: n,
        seed: c.seed,
        decoder: c.decoder.into(),
        mld_samples: c.mld_samples,
        cuts: vec![Cut::All],
    };
    learn_channel(&code, &c.noise.model(), Basis::Z, &opts)?;
    let s = t.elapsed().as_secs_f64();
    println!("learn (Z)    {:>10.3} s  ({:.3e} shots/s, {} decoder)", s, n as f64 / s, DecoderKind::from(c.decoder));
    let t = Instant::now();
    ideal_channel(&c.angles)?;
    println!("ideal        {:>10.3} s", t.elapsed().as_secs_f64());
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.cmd {
        Cmd::Synth(a) => synth(&a)?,
        Cmd::Validate(a) => return validate(&a.resolve()?),
        Cmd::Inject(a) => {
            let c = a.resolve()?;
            let r = run_injection(&c)?;
            let i = r.injection.as_ref().expect("injection section");
            for (name, e) in [("raw", i.raw), ("corrected", i.corrected), ("perfect", i.perfect)] {
                println!("{name:<10} F = {:.5} [{:.5}, {:.5}]", e.fidelity, e.ci_lo, e.ci_hi);
            }
            write_report(&r, &c)?;
        }
        Cmd::Factory(a) => {
            let c = a.resolve()?;
            let r = run_factory(&c)?;
            let f = r.factory.as_ref().expect("factory section");
            println!("acceptance {:.5} (ideal {:.5})", f.acceptance, f.ideal_acceptance);
            println!("injected   F = {:.5}", f.injected.fidelity);
            for p in &f.curve {
                println!("{:<14} accepted {:.5}  F = {:.5} [{:.5}, {:.5}]", p.cut, p.accepted_fraction, p.fidelity, p.ci_lo, p.ci_hi);
            }
            if let Some(x) = f.crossing {
                println!("crossing at rescale {x:.3}");
            }
            write_report(&r, &c)?;
        }
        Cmd::Decode(a) => decode(&a)?,
        Cmd::Bench(a) => bench(&a.resolve()?)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got `{v}`");
                return ExitCode::from(2);
            }
        }
    }
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
