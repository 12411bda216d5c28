//! The verifier side: challenge generation, verdicts and full rounds.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::icgen::{assemble_for_cost, assemble_program, gen_address_list, MemoryImage, ProgramShape};
use crate::power::{
    classify_states, extract_power_states, label_name, learn_pfsm, synthesize_trace, ExtractionConfig, Label,
    PfsmParams, Phase, PowerState, PowerStateSegment, PowerTrace,
};
use crate::timing::{
    detect_hash_phase, detect_network_phase, fit_network_model, fit_timing_model, DetectionConfig, NetworkModel,
    NetworkSample, TimingModel, TimingSample,
};

use super::machine::{prover_respond, Behavior, SimMachine};
use super::{Challenge, Framing, ProtocolError, Response};

/// How the verifier builds each round's program and address list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgramParams {
    pub degree: usize,
    /// Per-iteration cost to size programs for; `None` uses `depth` and
    /// `lfsr_count` directly.
    pub target_cost: Option<u64>,
    pub depth: u32,
    pub lfsr_count: usize,
    pub accumulator_bits: u32,
    pub word_size: u8,
    /// Bytes hashed per round.
    pub n_bytes: u64,
}

impl Default for ProgramParams {
    fn default() -> Self {
        Self {
            degree: 32,
            target_cost: Some(40),
            depth: 4,
            lfsr_count: 4,
            accumulator_bits: 64,
            word_size: 4,
            n_bytes: 2331,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifierModels {
    pub timing: TimingModel,
    pub network: NetworkModel,
    pub pfsm: PfsmParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub detection: DetectionConfig,
    pub extraction: ExtractionConfig,
    /// Relative distance from a level still labeled with its state.
    pub level_tolerance: f64,
    pub framing: Framing,
    /// The round may take at most this multiple of its predicted duration.
    pub rtt_factor: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            detection: DetectionConfig::default(),
            extraction: ExtractionConfig::default(),
            level_tolerance: 0.1,
            framing: Framing::default(),
            rtt_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub output_ok: bool,
    pub timing_ok: bool,
    pub language_ok: bool,
    pub hash_alarm: bool,
    pub network_alarm: bool,
    pub rtt_ok: bool,
    pub hash_predicted_us: f64,
    pub hash_measured_us: Option<f64>,
    pub hash_delta_us: Option<f64>,
    pub network_predicted_us: f64,
    pub network_measured_us: Option<f64>,
    pub network_delta_us: Option<f64>,
    pub labels: Vec<String>,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.output_ok && self.timing_ok && self.language_ok
    }
}

/// Fresh program, address list over the golden image and nonce.
pub fn verifier_initiate<R: RngCore + ?Sized>(
    golden: &MemoryImage,
    params: &ProgramParams,
    rng: &mut R,
) -> Result<Challenge, ProtocolError> {
    let program = match params.target_cost {
        Some(cost) => assemble_for_cost(params.degree, cost, params.accumulator_bits, params.word_size, rng)?,
        None => assemble_program(
            ProgramShape {
                degree: params.degree,
                depth: params.depth,
                lfsr_count: params.lfsr_count,
                accumulator_bits: params.accumulator_bits,
                word_size: params.word_size,
            },
            rng,
        )?,
    };
    let addresses = gen_address_list(params.n_bytes, golden.low(), golden.high(), params.word_size, rng)?;
    Ok(Challenge {
        program,
        addresses,
        nonce: rng.next_u64(),
    })
}

/// Durations of the hash plateau and of the challenge transfer (first to
/// last network plateau before the load), seconds.
fn phase_durations(segments: &[PowerStateSegment], labels: &[Label]) -> (f64, Option<f64>) {
    let hash = segments
        .iter()
        .zip(labels)
        .filter(|(_, l)| **l == Some(PowerState::S3))
        .map(|(s, _)| s.duration)
        .sum();
    let load = labels.iter().position(|l| *l == Some(PowerState::S2)).unwrap_or(labels.len());
    let net: Vec<&PowerStateSegment> = segments[..load]
        .iter()
        .zip(&labels[..load])
        .filter(|(_, l)| **l == Some(PowerState::S1))
        .map(|(s, _)| s)
        .collect();
    let span = match (net.first(), net.last()) {
        (Some(a), Some(b)) => Some(b.t_b - a.t_a),
        _ => None,
    };
    (hash, span)
}

/// Checks the reply against the golden image, the trace against the
/// protocol language, and the hash and challenge-transfer durations against
/// the models.
#[allow(clippy::too_many_arguments)]
pub fn verifier_verify(
    challenge: &Challenge,
    challenge_len: usize,
    response: &Response,
    trace: &PowerTrace,
    golden: &MemoryImage,
    models: &VerifierModels,
    cfg: &VerifyConfig,
) -> Result<Verdict, ProtocolError> {
    let program = &challenge.program;
    let expected = program.execute(golden, &challenge.addresses, challenge.nonce)?;
    let output_ok = response.hash == program.hash_bytes(expected.hash);

    let segments = extract_power_states(trace, &cfg.extraction)?;
    let labels = classify_states(&segments, &models.pfsm, cfg.level_tolerance);
    let language_ok = crate::power::validate_language(&labels);

    let n = challenge.addresses.total_bytes() as f64;
    let c = program.instructions_per_iteration() as f64;
    let hash_predicted_us = models.timing.predict(n, c);
    let network_predicted_us = models.network.predict(challenge_len as f64);

    let (mut hash_measured_us, mut network_measured_us) = (None, None);
    let (mut hash_alarm, mut network_alarm) = (true, true);
    if language_ok {
        let (hash, span) = phase_durations(&segments, &labels);
        hash_measured_us = Some(hash * 1e6);
        hash_alarm = detect_hash_phase(hash * 1e6, hash_predicted_us, &models.timing, &cfg.detection);
        if let Some(span) = span {
            network_measured_us = Some(span * 1e6);
            network_alarm = detect_network_phase(span * 1e6, network_predicted_us, &models.network, &cfg.detection);
        }
    }

    let half = models.pfsm.network_period / 2.0;
    let response_len = response.to_bytes().len() as f64;
    let predicted_total = cfg.framing.lead_in
        + network_predicted_us * 1e-6
        + half
        + cfg.framing.load
        + hash_predicted_us * 1e-6
        + half
        + (models.network.predict(response_len) * 1e-6).max(half);
    let rtt = trace.duration();
    let phase_sum: f64 = segments.iter().map(|s| s.duration).sum();
    let rtt_ok = phase_sum <= rtt + 1e-12 && rtt <= cfg.rtt_factor * predicted_total;

    Ok(Verdict {
        output_ok,
        timing_ok: language_ok && !hash_alarm && !network_alarm && rtt_ok,
        language_ok,
        hash_alarm,
        network_alarm,
        rtt_ok,
        hash_predicted_us,
        hash_measured_us,
        hash_delta_us: hash_measured_us.map(|m| m - hash_predicted_us),
        network_predicted_us,
        network_measured_us,
        network_delta_us: network_measured_us.map(|m| m - network_predicted_us),
        labels: labels.into_iter().map(label_name).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct Verifier {
    pub golden: MemoryImage,
    pub params: ProgramParams,
    pub models: VerifierModels,
    pub cfg: VerifyConfig,
}

#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub challenge: Vec<u8>,
    pub response: Vec<u8>,
    pub trace: PowerTrace,
    pub verdict: Verdict,
    pub nonce: u64,
    pub n_bytes: u64,
    pub instructions_per_iteration: u64,
}

/// initiate, respond, verify.
pub fn run_round<R: RngCore + ?Sized>(
    verifier: &Verifier,
    machine: &SimMachine,
    rng: &mut R,
) -> Result<RoundRecord, ProtocolError> {
    let challenge = verifier_initiate(&verifier.golden, &verifier.params, rng)?;
    let bytes = challenge.to_bytes()?;
    let out = prover_respond(machine, &bytes, rng)?;
    let response_bytes = out.response.to_bytes();
    let response = Response::from_bytes(&response_bytes)?;
    let verdict = verifier_verify(
        &challenge,
        bytes.len(),
        &response,
        &out.trace,
        &verifier.golden,
        &verifier.models,
        &verifier.cfg,
    )?;
    Ok(RoundRecord {
        n_bytes: challenge.addresses.total_bytes(),
        instructions_per_iteration: challenge.program.instructions_per_iteration(),
        nonce: challenge.nonce,
        challenge: bytes,
        response: response_bytes,
        trace: out.trace,
        verdict,
    })
}

/// Learns all verifier models from honest rounds on `machine`.
///
/// The power levels come from an idle recording and the round traces; the
/// timing model from the hash plateau durations over a grid of `N` and
/// program cost; the network model from the challenge transfer spans.
pub fn calibrate<R: RngCore + ?Sized>(
    machine: &SimMachine,
    golden: &MemoryImage,
    params: &ProgramParams,
    cfg: &VerifyConfig,
    rng: &mut R,
) -> Result<VerifierModels, ProtocolError> {
    let mut honest = machine.clone();
    honest.behavior = Behavior::Honest;
    honest.compromise_covered = false;

    const SIZES: [u64; 4] = [512, 1024, 2048, 4096];
    const COSTS: [u64; 4] = [15, 25, 40, 55];
    const REPEATS: usize = 3;
    let mut runs = Vec::new();
    for &n_bytes in &SIZES {
        for &cost in &COSTS {
            for _ in 0..REPEATS {
                let p = ProgramParams { n_bytes, target_cost: Some(cost), ..*params };
                let challenge = verifier_initiate(golden, &p, rng)?;
                let bytes = challenge.to_bytes()?;
                let out = prover_respond(&honest, &bytes, rng)?;
                runs.push((challenge, bytes.len(), out.trace));
            }
        }
    }

    let idle = synthesize_trace(&[Phase::Level(PowerState::S0, 2e-3)], &machine.pfsm, machine.sampling_rate, rng)?;
    let traces: Vec<PowerTrace> = runs.iter().map(|r| r.2.clone()).collect();
    let pfsm = learn_pfsm(&traces, &idle, &cfg.extraction, machine.pfsm.network_period)?;

    let mut timing_samples = Vec::new();
    let mut network_samples = Vec::new();
    for (challenge, len, trace) in &runs {
        let segments = extract_power_states(trace, &cfg.extraction)?;
        let labels = classify_states(&segments, &pfsm, cfg.level_tolerance);
        if !crate::power::validate_language(&labels) {
            continue;
        }
        let (hash, span) = phase_durations(&segments, &labels);
        timing_samples.push(TimingSample {
            n: challenge.addresses.total_bytes() as f64,
            c: challenge.program.instructions_per_iteration() as f64,
            t_us: hash * 1e6,
        });
        if let Some(span) = span {
            network_samples.push(NetworkSample { bytes: *len as f64, t_us: span * 1e6 });
        }
    }
    Ok(VerifierModels {
        timing: fit_timing_model(&timing_samples)?,
        network: fit_network_model(&network_samples)?,
        pfsm,
    })
}
