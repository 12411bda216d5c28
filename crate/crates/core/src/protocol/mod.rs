//! Attestation rounds between a verifier and a simulated untrusted machine.
//!
//! The verifier sends a fresh program, address list and nonce; the machine
//! hashes its memory and replies, and the verifier checks the reply, the
//! durations of the network and hash phases, and the order of power states
//! seen on the current trace.

mod machine;
mod verifier;
mod wire;

use thiserror::Error;

use crate::icgen::IcError;
use crate::power::PowerError;
use crate::timing::TimingError;

pub use machine::{prover_respond, Behavior, ProverOutput, SimMachine};
pub use verifier::{
    calibrate, run_round, verifier_initiate, verifier_verify, ProgramParams, RoundRecord, Verdict, Verifier,
    VerifierModels, VerifyConfig,
};
pub use wire::{Challenge, Response, CHALLENGE_MAGIC, RESPONSE_MAGIC, WIRE_VERSION};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("CRC mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Crc { stored: u32, computed: u32 },
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("more than 65535 address tuples")]
    TooManyTuples,
    #[error("hash length {got} does not match accumulator width {want}")]
    HashWidth { got: usize, want: usize },
    #[error(transparent)]
    Program(#[from] IcError),
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error(transparent)]
    Timing(#[from] TimingError),
}

/// Fixed durations of the round framing, seconds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Framing {
    /// Idle time recorded before the challenge arrives.
    pub lead_in: f64,
    /// Program load time, independent of the program.
    pub load: f64,
}

impl Default for Framing {
    fn default() -> Self {
        Self {
            lead_in: 100e-6,
            load: 50e-6,
        }
    }
}
