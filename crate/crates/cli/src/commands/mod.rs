//! Subcommand parameter sets and their runners.
//!
//! Each command resolves its flags and config file into a parameter struct
//! once; the struct alone determines the output bytes.

mod count_space;
mod extract;
mod fit;
mod game_sweep;
mod gen_poly;
mod optimize;
mod protocol;
mod synth;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use count_space::CountSpaceParams;
pub use extract::ExtractParams;
pub use fit::{FitKind, FitParams};
pub use game_sweep::GameSweepParams;
pub use gen_poly::GenPolyParams;
pub use optimize::OptimizeParams;
pub use protocol::ProtocolParams;
pub use synth::SynthParams;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum Job {
    GenPoly(GenPolyParams),
    CountSpace(CountSpaceParams),
    Protocol(ProtocolParams),
    GameSweep(GameSweepParams),
    Fit(FitParams),
    Extract(ExtractParams),
    Optimize(OptimizeParams),
    Synth(SynthParams),
}

/// Deterministic file content plus a report that goes to stdout only.
pub struct Output {
    pub bytes: Vec<u8>,
    pub report: String,
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GenPoly(_) => "gen-poly",
            Self::CountSpace(_) => "count-space",
            Self::Protocol(_) => "protocol",
            Self::GameSweep(_) => "game-sweep",
            Self::Fit(_) => "fit",
            Self::Extract(_) => "extract",
            Self::Optimize(_) => "optimize",
            Self::Synth(_) => "synth",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::GenPoly(p) => Some(p.seed),
            Self::Protocol(p) => Some(p.seed),
            Self::GameSweep(p) => Some(p.seed),
            Self::Synth(p) => Some(p.seed),
            Self::CountSpace(_) | Self::Fit(_) | Self::Extract(_) | Self::Optimize(_) => None,
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        match self {
            Self::Fit(p) => vec![p.input.clone()],
            Self::Extract(p) => vec![p.input.clone()],
            Self::Optimize(p) => p.timing_model.iter().chain(&p.network_model).cloned().collect(),
            _ => Vec::new(),
        }
    }

    pub fn run(&self) -> Result<Output, CliError> {
        match self {
            Self::GenPoly(p) => p.run(),
            Self::CountSpace(p) => p.run(),
            Self::Protocol(p) => p.run(),
            Self::GameSweep(p) => p.run(),
            Self::Fit(p) => p.run(),
            Self::Extract(p) => p.run(),
            Self::Optimize(p) => p.run(),
            Self::Synth(p) => p.run(),
        }
    }
}

/// `[pfsm]` section; levels in amperes, period in microseconds.
pub(crate) fn pfsm_from_config(cfg: &crate::config::Config, default_noise: f64) -> Result<poweralert::power::PfsmParams, CliError> {
    let d = poweralert::power::PfsmParams::default();
    let p = poweralert::power::PfsmParams {
        i_idle: cfg.get("pfsm", "i_idle", d.i_idle)?,
        i_network: cfg.get("pfsm", "i_network", d.i_network)?,
        i_load: cfg.get("pfsm", "i_load", d.i_load)?,
        i_hash: cfg.get("pfsm", "i_hash", d.i_hash)?,
        network_period: cfg.get("pfsm", "network_period_us", d.network_period * 1e6)? * 1e-6,
        noise_sigma: cfg.get("pfsm", "noise_sigma", default_noise)?,
    };
    p.validate().map_err(|e| cfg.invalid("pfsm", "i_idle", &e.to_string()))?;
    Ok(p)
}

/// `[detection]` section over the library defaults.
pub(crate) fn detection_from_config(cfg: &crate::config::Config) -> Result<poweralert::timing::DetectionConfig, CliError> {
    let d = poweralert::timing::DetectionConfig::default();
    let c = poweralert::timing::DetectionConfig {
        gamma: cfg.get("detection", "gamma", d.gamma)?,
        sampling_rate: d.sampling_rate,
        k: cfg.get("detection", "k", d.k)?,
        cost: cfg.get("detection", "cost", d.cost)?,
        coverage_min: cfg.get("detection", "coverage_min", d.coverage_min)?,
        n_total: cfg.get("detection", "n_total", d.n_total)?,
        c_min: cfg.get("detection", "c_min", d.c_min)?,
        instruction_bytes: cfg.get("detection", "instruction_bytes", d.instruction_bytes)?,
    };
    c.validate().map_err(|e| cfg.invalid("detection", "gamma", &e.to_string()))?;
    Ok(c)
}
