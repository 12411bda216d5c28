use poweralert::power::{round_phases, synthesize_trace, write_trace, PfsmParams, RoundPhases};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{pfsm_from_config, Output};
use crate::config::Config;
use crate::error::CliError;

/// One attestation round rendered as a current trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub pfsm: PfsmParams,
    /// Phase durations, seconds.
    pub round: RoundPhases,
    pub sampling_rate: f64,
    pub seed: u64,
}

impl SynthParams {
    pub fn from_config(cfg: &Config, seed: Option<u64>) -> Result<Self, CliError> {
        let pfsm = pfsm_from_config(cfg, 0.02)?;
        let us = |key: &str, default: f64| -> Result<f64, CliError> {
            let v: f64 = cfg.get("round", key, default)?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(cfg.invalid("round", key, "must be a positive duration"));
            }
            Ok(v * 1e-6)
        };
        let round = RoundPhases {
            lead_in: us("lead_in_us", 100.0)?,
            network: us("network_us", 250.0)?,
            gap: us("gap_us", pfsm.network_period * 0.5e6)?,
            load: us("load_us", 50.0)?,
            hash: us("hash_us", 935.45)?,
            output: us("output_us", 50.0)?,
        };
        let sampling_rate: f64 = cfg.get("trace", "sampling_rate", 500e3)?;
        if !(sampling_rate > 0.0 && sampling_rate.is_finite()) {
            return Err(cfg.invalid("trace", "sampling_rate", "must be positive"));
        }
        let seed = match seed {
            Some(s) => s,
            None => cfg.get("", "seed", 0)?,
        };
        Ok(Self { pfsm, round, sampling_rate, seed })
    }

    pub fn run(&self) -> Result<Output, CliError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let trace = synthesize_trace(&round_phases(&self.round), &self.pfsm, self.sampling_rate, &mut rng)?;
        let mut bytes = Vec::new();
        write_trace(&trace, &mut bytes)?;
        let report = format!("{} samples, {:.6} s\n", trace.len(), trace.duration());
        Ok(Output { bytes, report })
    }
}
