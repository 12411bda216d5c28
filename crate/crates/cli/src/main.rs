//! `poweralert`: scripted access to every simulator stage.
//!
//! Each subcommand resolves its flags and optional config file into a
//! parameter set, runs it, and writes the output to `--out` (with a run
//! manifest beside it) or to stdout. `replay` re-runs a manifest.

mod commands;
mod config;
mod error;
mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{
    CountSpaceParams, ExtractParams, FitKind, FitParams, Format, GameSweepParams, GenPolyParams, Job, OptimizeParams,
    ProtocolParams, SynthParams,
};
use config::{parse_f64_list, parse_u64_list, Config};
use error::CliError;
use manifest::RunManifest;

#[derive(Args)]
struct Common {
    /// Output file; a `<out>.manifest.json` is written beside it. Stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed; overrides a `seed` key in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sectioned `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Random irreducible polynomials and mean generation time per degree.
    GenPoly {
        /// Degrees, e.g. `5` or `8-16,32`.
        #[arg(long, value_parser = u64_list, required = true)]
        degrees: Vec<Vec<u64>>,
        #[arg(long, default_value_t = 10)]
        count: u64,
    },
    /// Exact program-space counts over degree and tree depth.
    CountSpace {
        #[arg(long, value_parser = u64_list, default_value = "1-8")]
        degrees: Vec<Vec<u64>>,
        #[arg(long, value_parser = u64_list, default_value = "1-10")]
        depths: Vec<Vec<u64>>,
        /// Node cap; defaults to the depth.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// End-to-end attestation rounds against a simulated machine, as JSON lines.
    Protocol {
        #[arg(long, default_value_t = 10)]
        rounds: u64,
    },
    /// Verifier versus attacker game over a grid of periods.
    GameSweep {
        /// Runs per cell; overrides `[game] runs`.
        #[arg(long)]
        runs: Option<u64>,
    },
    /// Least-squares model fit from a CSV of samples.
    Fit {
        #[arg(long, value_enum)]
        kind: FitKind,
        #[arg(long)]
        input: PathBuf,
    },
    /// Segment listing of a PWTR trace file.
    Extract {
        #[arg(long)]
        input: PathBuf,
    },
    /// Hash size and cost per sampling rate.
    Optimize {
        /// Timing model file; the reference model if absent.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Network model file; the reference model if absent.
        #[arg(long)]
        network: Option<PathBuf>,
        /// Sampling rates in Hz.
        #[arg(long, value_parser = f64_list, default_value = "1e6,500e3,250e3,200e3,54e3")]
        rates: Vec<Vec<f64>>,
    },
    /// Synthesize one attestation round as a PWTR trace file.
    Synth,
    /// Re-run a manifest and write its output.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Parser)]
#[command(name = "poweralert", version, about = "Power-side-channel attestation simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

// Each flag occurrence parses to a list; occurrences are concatenated.
fn u64_list(s: &str) -> Result<Vec<u64>, String> {
    parse_u64_list(s)
}

fn f64_list(s: &str) -> Result<Vec<f64>, String> {
    parse_f64_list(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.common, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(common: Common, command: Command) -> Result<(), CliError> {
    let cfg = match &common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let job = match command {
        Command::Replay { manifest } => return replay(&manifest, common.out.as_deref()),
        Command::GenPoly { degrees, count } => {
            Job::GenPoly(GenPolyParams::new(flatten(degrees), count, seed_or(&cfg, common.seed)?)?)
        }
        Command::CountSpace { degrees, depths, cap } => {
            Job::CountSpace(CountSpaceParams::new(flatten(degrees), flatten(depths), cap, common.format)?)
        }
        Command::Protocol { rounds } => Job::Protocol(ProtocolParams::from_config(&cfg, rounds, common.seed)?),
        Command::GameSweep { runs } => Job::GameSweep(GameSweepParams::from_config(&cfg, common.seed, runs, common.format)?),
        Command::Fit { kind, input } => Job::Fit(FitParams { kind, input }),
        Command::Extract { input } => Job::Extract(ExtractParams::from_config(input, &cfg)?),
        Command::Optimize { model, network, rates } => {
            Job::Optimize(OptimizeParams::from_config(model, network, flatten(rates), &cfg, common.format)?)
        }
        Command::Synth => Job::Synth(SynthParams::from_config(&cfg, common.seed)?),
    };
    cfg.finish()?;
    execute(job, common.out.as_deref())
}

fn flatten<T>(v: Vec<Vec<T>>) -> Vec<T> {
    v.into_iter().flatten().collect()
}

fn seed_or(cfg: &Config, seed: Option<u64>) -> Result<u64, CliError> {
    match seed {
        Some(s) => Ok(s),
        None => cfg.get("", "seed", 0),
    }
}

fn execute(job: Job, out: Option<&Path>) -> Result<(), CliError> {
    let output = job.run()?;
    match out {
        Some(path) => {
            let manifest = RunManifest::new(job, path)?;
            std::fs::write(path, &output.bytes).map_err(CliError::io(path.display().to_string()))?;
            manifest.write(path)?;
            print!("{}", output.report);
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&output.bytes).map_err(CliError::io("stdout"))?;
            if !output.report.is_empty() {
                eprint!("{}", output.report);
            }
        }
    }
    Ok(())
}

/// Writes to `out`, or to the output recorded in the manifest.
fn replay(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let manifest = RunManifest::load(path)?;
    manifest.check_inputs()?;
    let target = match out {
        Some(p) => p.to_path_buf(),
        None => manifest
            .outputs
            .first()
            .cloned()
            .ok_or_else(|| CliError::Format(format!("manifest {} lists no outputs", path.display())))?,
    };
    let output = manifest.job.run()?;
    std::fs::write(&target, &output.bytes).map_err(CliError::io(target.display().to_string()))?;
    print!("{}", output.report);
    Ok(())
}
