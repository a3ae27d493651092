use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nmc::codec::{decode, encode, read_codeword, write_codeword};
use nmc::harness::{
    compare_with_oracle, default_projections, run_experiment_t, ExperimentReport, OracleReport, TamperSpec,
};
use nmc::nmext::{derive_asymptotic, Deltas, NmExt, ParamProfile};
use nmc::{BitString, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Split-state non-malleable codes: encoder, decoder and tampering experiments.
#[derive(Parser)]
#[command(name = "nmc", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check or derive parameter profiles.
    #[command(subcommand)]
    Params(ParamsCmd),
    /// Encode a message (a bit string such as 0110) into an NMC1 file.
    Encode {
        message: String,
        #[command(flatten)]
        common: Common,
    },
    /// Decode an NMC1 file and print the message.
    Decode {
        file: PathBuf,
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Tampering experiments.
    #[command(subcommand)]
    Tamper(TamperCmd),
    /// Compare the encoder against the exact preimage sampler.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Pretty-print a saved report.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand)]
enum ParamsCmd {
    /// Check a profile's identities; exits non-zero listing every violation.
    Validate {
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Derive a profile from n and the three exponents.
    Derive {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta1: f64,
        #[arg(long)]
        delta2: f64,
        #[arg(long)]
        delta3: f64,
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TamperCmd {
    /// Run one experiment and emit its report.
    Run {
        /// Family spec, e.g. `xor:y:1` or `identity+constant:3`.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Number of tampering functions; must match the profile.
        #[arg(long)]
        t: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Defaults to the micro profile.
    Compare {
        /// Draws per message.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Messages to test; all of them when omitted.
        #[arg(long = "message")]
        messages: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    Show { file: PathBuf },
}

#[derive(Args)]
struct Common {
    /// Profile TOML; the canonical toy profile when omitted.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_profile(path: Option<&Path>, fallback: fn() -> ParamProfile) -> Result<ParamProfile> {
    match path {
        None => Ok(fallback()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(ParamProfile::from_toml(&text)?)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn parse_bits(s: &str) -> Result<BitString> {
    s.parse().map_err(|e| anyhow::anyhow!("bad message {s:?}: {e}"))
}

fn show_experiment(r: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment {} on profile {}", r.tamper, r.profile_id);
    let _ = writeln!(
        s,
        "  t = {}, trials = {}, seed = {}, completed = {}, encoder failures = {}",
        r.t, r.trials, r.seed, r.completed, r.encoder_failures
    );
    let within = if r.within_radius() { "within" } else { "outside" };
    let _ = writeln!(
        s,
        "  l1 = {:.4} ({within} radius {:.4}), statistical distance = {:.4}",
        r.l1, r.confidence_radius, r.statistical_distance
    );
    let agree = if r.split_half_agrees() { "agree" } else { "disagree" };
    let _ = writeln!(
        s,
        "  split halves: l1 = {:.4}, radius = {:.4} ({agree})",
        r.split_half_l1, r.split_half_radius
    );
    let _ = writeln!(s, "  max per-message l1 = {:.4}", r.max_message_l1);
    let _ = writeln!(s, "  D_f:");
    for (k, v) in &r.d_f {
        let _ = writeln!(s, "    {k:>12}  {v:.4}");
    }
    if r.components.len() > 1 {
        for c in &r.components {
            let _ = writeln!(
                s,
                "  component {} ({}): l1 = {:.4}, radius = {:.4}",
                c.index, c.family, c.l1, c.confidence_radius
            );
        }
    }
    s
}

fn show_oracle(r: &OracleReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "oracle comparison on profile {}", r.profile_id);
    let _ = writeln!(s, "  draws = {}, seed = {}, max l1 = {:.4}", r.draws, r.seed, r.max_l1);
    for m in &r.messages {
        let _ = writeln!(s, "  message {}: max l1 = {:.4}", m.message, m.max_l1);
        for row in &m.projections {
            let _ = writeln!(s, "    {:<10} support {:>3}  l1 {:.4}", row.name, row.support, row.l1);
        }
    }
    s
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Params(ParamsCmd::Validate { profile }) => {
            match load_profile(profile.as_deref(), ParamProfile::canonical_toy) {
                Ok(p) => {
                    println!("ok {}", p.hash_hex());
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => match e.downcast::<Error>()? {
                    Error::InvalidProfile(v) => {
                        for line in v {
                            println!("violation: {line}");
                        }
                        Ok(ExitCode::FAILURE)
                    }
                    other => Err(other.into()),
                },
            }
        }
        Cmd::Params(ParamsCmd::Derive {
            n,
            delta1,
            delta2,
            delta3,
            t,
            out,
        }) => {
            let p = derive_asymptotic(n, Deltas { delta1, delta2, delta3 }, t)?;
            emit(out.as_deref(), &p.to_toml())?;
            let v = p.violations();
            for line in &v {
                eprintln!("violation: {line}");
            }
            Ok(if v.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Cmd::Encode { message, common } => {
            let p = load_profile(common.profile.as_deref(), ParamProfile::canonical_toy)?;
            let nm = NmExt::new(&p)?;
            let s = parse_bits(&message)?;
            let cw = encode(&nm, &s, &mut ChaCha8Rng::seed_from_u64(common.seed))?;
            let bytes = write_codeword(&p.hash(), &cw);
            let Some(out) = common.out else {
                bail!("encode needs --out <file>")
            };
            fs::write(&out, bytes).with_context(|| format!("writing {}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Decode { file, profile } => {
            let p = load_profile(profile.as_deref(), ParamProfile::canonical_toy)?;
            let bytes = fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
            let (_, cw) = read_codeword(&bytes, Some(&p.hash()))?;
            println!("{}", decode(&NmExt::new(&p)?, &cw)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Tamper(TamperCmd::Run {
            family,
            trials,
            t,
            common,
        }) => {
            let spec: TamperSpec = family.parse()?;
            let t = t.unwrap_or(spec.arity());
            let fallback = if t == 2 {
                ParamProfile::canonical_toy_t2
            } else {
                ParamProfile::canonical_toy
            };
            let p = load_profile(common.profile.as_deref(), fallback)?;
            if t != spec.arity() || t != p.t {
                bail!(
                    "--t {t} must equal the family count {} and the profile's t = {}",
                    spec.arity(),
                    p.t
                );
            }
            let r = run_experiment_t(&NmExt::new(&p)?, &spec, trials, common.seed)?;
            emit(common.out.as_deref(), &r.to_toml())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Oracle(OracleCmd::Compare {
            trials,
            messages,
            common,
        }) => {
            let p = load_profile(common.profile.as_deref(), ParamProfile::micro)?;
            let nm = NmExt::new(&p)?;
            let msgs = if messages.is_empty() {
                if p.output_len > 8 {
                    bail!("{}-bit messages: pass --message explicitly", p.output_len);
                }
                (0..1u64 << p.output_len)
                    .map(|v| BitString::from_u64(v, p.output_len))
                    .collect()
            } else {
                messages.iter().map(|m| parse_bits(m)).collect::<Result<Vec<_>>>()?
            };
            let r = compare_with_oracle(&nm, &msgs, &default_projections(&nm), trials, common.seed)?;
            emit(common.out.as_deref(), &r.to_toml())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Report(ReportCmd::Show { file }) => {
            let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            if let Ok(r) = ExperimentReport::from_toml(&text) {
                emit(None, &show_experiment(&r))?;
            } else {
                let r = OracleReport::from_toml(&text).context("neither an experiment nor an oracle report")?;
                emit(None, &show_oracle(&r))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
