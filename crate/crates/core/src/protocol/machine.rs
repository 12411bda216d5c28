//! The prover side: a simulated machine with an optional attacker.

use rand::RngCore;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::icgen::MemoryImage;
use crate::power::{round_phases, synthesize_trace, PfsmParams, PowerTrace, RoundPhases};
use crate::timing::{NetworkModel, TimingModel};

use super::{Challenge, Framing, ProtocolError, Response};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Behavior {
    Honest,
    /// Reads served from a pristine shadow copy at `k` extra instructions per
    /// iteration.
    Redirect { k: u64 },
    /// Program forwarded to a helper, adding `extra_bytes` of transfer.
    Proxy { extra_bytes: u64 },
    /// Compromised bytes restored for the duration of the round.
    Hidden,
}

#[derive(Debug, Clone)]
pub struct SimMachine {
    /// Real memory, including any compromise.
    pub memory: MemoryImage,
    /// Original content of compromised bytes.
    shadow: Vec<(u64, u8)>,
    /// Ground-truth hash timing.
    pub timing: TimingModel,
    /// Standard deviation of the hash duration, microseconds.
    pub sigma_true: f64,
    pub network: NetworkModel,
    /// Standard deviation of transfer durations, microseconds.
    pub sigma_network_true: f64,
    pub pfsm: PfsmParams,
    pub sampling_rate: f64,
    pub framing: Framing,
    pub behavior: Behavior,
    /// Flip the first covered byte of each challenge before hashing, so the
    /// compromise always lies inside the checked set.
    pub compromise_covered: bool,
}

impl SimMachine {
    pub fn new(memory: MemoryImage, timing: TimingModel, network: NetworkModel, pfsm: PfsmParams, sampling_rate: f64) -> Self {
        Self {
            memory,
            shadow: Vec::new(),
            sigma_true: timing.sigma_m,
            timing,
            sigma_network_true: network.sigma_n,
            network,
            pfsm,
            sampling_rate,
            framing: Framing::default(),
            behavior: Behavior::Honest,
            compromise_covered: false,
        }
    }

    /// Overwrites `addr`, remembering the first original value.
    pub fn compromise(&mut self, addr: u64, value: u8) -> Result<(), ProtocolError> {
        let old = self.memory.set_byte(addr, value)?;
        if !self.shadow.iter().any(|&(a, _)| a == addr) {
            self.shadow.push((addr, old));
        }
        Ok(())
    }

    pub fn compromised(&self) -> &[(u64, u8)] {
        &self.shadow
    }

    fn restored(&self) -> MemoryImage {
        let mut m = self.memory.clone();
        for &(a, v) in &self.shadow {
            m.set_byte(a, v).expect("shadow addresses were in bounds");
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct ProverOutput {
    pub response: Response,
    pub trace: PowerTrace,
    /// True durations in microseconds: challenge transfer, hash, response
    /// transfer.
    pub network_us: f64,
    pub hash_us: f64,
    pub output_us: f64,
    pub instruction_count: u64,
}

/// Runs a challenge on the machine and records the current trace.
///
/// Honest and proxy machines hash their real memory, redirecting and hiding
/// machines hash the pristine content. Redirection costs `k` extra
/// instructions per iteration; proxying adds the transfer time of the extra
/// bytes to the challenge phase.
pub fn prover_respond<R: RngCore + ?Sized>(
    machine: &SimMachine,
    challenge_bytes: &[u8],
    rng: &mut R,
) -> Result<ProverOutput, ProtocolError> {
    let challenge = Challenge::from_bytes(challenge_bytes)?;
    let program = &challenge.program;

    let mut memory = match machine.behavior {
        Behavior::Honest | Behavior::Proxy { .. } => machine.memory.clone(),
        Behavior::Redirect { .. } | Behavior::Hidden => machine.restored(),
    };
    if machine.compromise_covered && !matches!(machine.behavior, Behavior::Redirect { .. } | Behavior::Hidden) {
        if let Some(addr) = challenge.addresses.expand().next() {
            let old = memory.byte(addr).ok_or(crate::icgen::IcError::OutOfBounds { address: addr })?;
            memory.set_byte(addr, !old)?;
        }
    }
    let exec = program.execute(&memory, &challenge.addresses, challenge.nonce)?;
    let response = Response { hash: program.hash_bytes(exec.hash) };

    let extra_c = match machine.behavior {
        Behavior::Redirect { k } => k,
        _ => 0,
    };
    let n = challenge.addresses.total_bytes() as f64;
    let c = (program.instructions_per_iteration() + extra_c) as f64;
    let hash_noise = gaussian(machine.sigma_true, rng);
    let net_noise = gaussian(machine.sigma_network_true, rng);
    let out_noise = gaussian(machine.sigma_network_true, rng);

    let mut network_us = machine.network.predict(challenge_bytes.len() as f64) + net_noise;
    if let Behavior::Proxy { extra_bytes } = machine.behavior {
        network_us += machine.network.predict(extra_bytes as f64);
    }
    let half_period_us = machine.pfsm.network_period * 0.5e6;
    let hash_us = (machine.timing.predict(n, c) + hash_noise).max(1.0);
    let output_us = (machine.network.predict(response.to_bytes().len() as f64) + out_noise).max(half_period_us);
    let network_us = network_us.max(1.0);

    let phases = round_phases(&RoundPhases {
        lead_in: machine.framing.lead_in,
        network: network_us * 1e-6,
        gap: machine.pfsm.network_period / 2.0,
        load: machine.framing.load,
        hash: hash_us * 1e-6,
        output: output_us * 1e-6,
    });
    let trace = synthesize_trace(&phases, &machine.pfsm, machine.sampling_rate, rng)?;
    Ok(ProverOutput {
        response,
        trace,
        network_us,
        hash_us,
        output_us,
        instruction_count: exec.instruction_count,
    })
}

fn gaussian<R: RngCore + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite positive sigma").sample(rng)
    } else {
        0.0
    }
}
