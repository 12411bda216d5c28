use std::fmt::Write as _;

use poweralert::icgen::MemoryImage;
use poweralert::power::PfsmParams;
use poweralert::protocol::{calibrate, run_round, Behavior, ProgramParams, SimMachine, Verifier, VerifierModels, VerifyConfig};
use poweralert::timing::{NetworkModel, TimingModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{detection_from_config, pfsm_from_config, Output};
use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub rounds: u64,
    pub seed: u64,
    pub memory_low: u64,
    pub memory_size: u64,
    pub memory_seed: u64,
    pub behavior: Behavior,
    /// `(address, new value)` pairs written before the first round.
    pub compromise: Vec<(u64, u8)>,
    pub compromise_covered: bool,
    /// Ground-truth models of the simulated machine.
    pub machine_timing: TimingModel,
    pub machine_network: NetworkModel,
    pub sigma_true: f64,
    pub sigma_network_true: f64,
    pub pfsm: PfsmParams,
    pub sampling_rate: f64,
    pub program: ProgramParams,
    /// Verifier models; replaced by learned ones when `calibrate` is set.
    pub models: VerifierModels,
    pub calibrate: bool,
    pub verify: VerifyConfig,
}

#[derive(Serialize)]
struct Line<'a> {
    round: u64,
    nonce: u64,
    n_bytes: u64,
    instructions_per_iteration: u64,
    pass: bool,
    #[serde(flatten)]
    verdict: &'a poweralert::protocol::Verdict,
}

fn parse_u64(s: &str) -> Option<u64> {
    let s = s.trim();
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

impl ProtocolParams {
    pub fn from_config(cfg: &Config, rounds: u64, seed: Option<u64>) -> Result<Self, CliError> {
        let hex = |section: &str, key: &str, default: u64| -> Result<u64, CliError> {
            match cfg.raw(section, key) {
                None => Ok(default),
                Some(v) => parse_u64(v).ok_or_else(|| cfg.invalid(section, key, "expected an integer")),
            }
        };
        // Both knobs are always read so a config can switch behavior alone.
        let k = cfg.get("machine", "redirect_k", 4)?;
        let extra_bytes = cfg.get("machine", "proxy_extra_bytes", 160)?;
        let behavior = match cfg.raw("machine", "behavior").unwrap_or("honest") {
            "honest" => Behavior::Honest,
            "redirect" => Behavior::Redirect { k },
            "proxy" => Behavior::Proxy { extra_bytes },
            "hidden" => Behavior::Hidden,
            _ => return Err(cfg.invalid("machine", "behavior", "expected honest, redirect, proxy or hidden")),
        };
        let mut compromise = Vec::new();
        if let Some(list) = cfg.raw("machine", "compromise") {
            for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let pair = item.split_once(':').and_then(|(a, v)| {
                    Some((parse_u64(a)?, u8::try_from(parse_u64(v)?).ok()?))
                });
                compromise.push(pair.ok_or_else(|| cfg.invalid("machine", "compromise", "expected addr:value pairs"))?);
            }
        }

        let machine_timing = TimingModel::reference();
        let machine_network = NetworkModel::reference();
        let pfsm = pfsm_from_config(cfg, 0.02)?;
        let sampling_rate: f64 = cfg.get("machine", "sampling_rate", 500e3)?;
        if !(sampling_rate > 0.0) {
            return Err(cfg.invalid("machine", "sampling_rate", "must be positive"));
        }

        let d = ProgramParams::default();
        let target_cost: u64 = cfg.get("program", "target_cost", d.target_cost.unwrap_or(0))?;
        let program = ProgramParams {
            degree: cfg.get("program", "degree", d.degree)?,
            target_cost: (target_cost > 0).then_some(target_cost),
            depth: cfg.get("program", "depth", d.depth)?,
            lfsr_count: cfg.get("program", "lfsr_count", d.lfsr_count)?,
            accumulator_bits: cfg.get("program", "accumulator_bits", d.accumulator_bits)?,
            word_size: cfg.get("program", "word_size", d.word_size)?,
            n_bytes: cfg.get("program", "n_bytes", d.n_bytes)?,
        };

        let t = TimingModel::reference();
        let n = NetworkModel::reference();
        let models = VerifierModels {
            timing: TimingModel {
                beta0: cfg.get("model", "beta0", t.beta0)?,
                beta1: cfg.get("model", "beta1", t.beta1)?,
                beta2: cfg.get("model", "beta2", t.beta2)?,
                beta3: cfg.get("model", "beta3", t.beta3)?,
                sigma_m: cfg.get("model", "sigma_m", t.sigma_m)?,
            },
            network: NetworkModel {
                slope: cfg.get("model", "slope", n.slope)?,
                intercept: cfg.get("model", "intercept", n.intercept)?,
                sigma_n: cfg.get("model", "sigma_n", n.sigma_n)?,
            },
            pfsm,
        };
        let mut detection = detection_from_config(cfg)?;
        detection.sampling_rate = sampling_rate;
        let vd = VerifyConfig::default();
        let verify = VerifyConfig {
            detection,
            level_tolerance: cfg.get("verifier", "level_tolerance", vd.level_tolerance)?,
            rtt_factor: cfg.get("verifier", "rtt_factor", vd.rtt_factor)?,
            ..vd
        };

        let p = Self {
            rounds,
            seed: match seed {
                Some(s) => s,
                None => cfg.get("", "seed", 0)?,
            },
            memory_low: hex("machine", "memory_low", 0x1_0000)?,
            memory_size: hex("machine", "memory_size", 1 << 16)?,
            memory_seed: hex("machine", "memory_seed", 7)?,
            behavior,
            compromise,
            compromise_covered: cfg.get("machine", "compromise_covered", false)?,
            sigma_true: cfg.get("machine", "sigma_true", machine_timing.sigma_m)?,
            sigma_network_true: cfg.get("machine", "sigma_network_true", machine_network.sigma_n)?,
            machine_timing,
            machine_network,
            pfsm,
            sampling_rate,
            program,
            models,
            calibrate: cfg.get("verifier", "calibrate", false)?,
            verify,
        };
        if p.memory_size == 0 || p.memory_size > 1 << 30 {
            return Err(cfg.invalid("machine", "memory_size", "must be in 1..=2^30"));
        }
        Ok(p)
    }

    /// One JSON object per round.
    pub fn run(&self) -> Result<Output, CliError> {
        let golden = MemoryImage::random(self.memory_low, self.memory_size as usize, self.memory_seed);
        let mut machine =
            SimMachine::new(golden.clone(), self.machine_timing, self.machine_network, self.pfsm, self.sampling_rate);
        machine.sigma_true = self.sigma_true;
        machine.sigma_network_true = self.sigma_network_true;
        machine.behavior = self.behavior;
        machine.compromise_covered = self.compromise_covered;
        for &(addr, value) in &self.compromise {
            machine.compromise(addr, value)?;
        }

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let models = if self.calibrate {
            calibrate(&machine, &golden, &self.program, &self.verify, &mut rng)?
        } else {
            self.models
        };
        let verifier = Verifier { golden, params: self.program, models, cfg: self.verify };

        let mut out = String::new();
        let (mut passes, mut output_fail, mut timing_fail) = (0u64, 0u64, 0u64);
        for round in 0..self.rounds {
            let r = run_round(&verifier, &machine, &mut rng)?;
            let line = Line {
                round,
                nonce: r.nonce,
                n_bytes: r.n_bytes,
                instructions_per_iteration: r.instructions_per_iteration,
                pass: r.verdict.pass(),
                verdict: &r.verdict,
            };
            out.push_str(&serde_json::to_string(&line).expect("json"));
            out.push('\n');
            passes += u64::from(r.verdict.pass());
            output_fail += u64::from(!r.verdict.output_ok);
            timing_fail += u64::from(!r.verdict.timing_ok);
        }
        let mut report = String::new();
        writeln!(
            report,
            "{} rounds: {passes} passed, {output_fail} output failures, {timing_fail} timing alarms",
            self.rounds
        )
        .unwrap();
        Ok(Output { bytes: out.into_bytes(), report })
    }
}
