//! Current traces and power states.
//!
//! Traces are synthesized from a four-state machine (idle, network, load,
//! hash), segmented into near-constant plateaus with a filter and derivative
//! threshold, labeled by nearest level and checked against the protocol
//! language.

mod extract;
mod file;
mod language;
mod synth;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extract::{classify_states, extract_power_states, learn_pfsm, ExtractionConfig, PowerStateSegment};
pub use file::{read_trace, read_trace_file, write_trace, write_trace_file, TRACE_MAGIC, TRACE_VERSION};
pub use language::{collapse, validate_language};
pub use synth::{expand_phases, round_phases, synthesize_trace, Phase, RoundPhases};

#[derive(Debug, Error)]
pub enum PowerError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("learning failed: {0}")]
    LearningFailure(String),
    #[error("trace format error at byte offset {offset}: {reason}")]
    Format { offset: u64, reason: &'static str },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PowerState {
    /// Idle.
    S0,
    /// Network transfer.
    S1,
    /// Program load.
    S2,
    /// Hash computation.
    S3,
}

impl PowerState {
    pub const ALL: [PowerState; 4] = [Self::S0, Self::S1, Self::S2, Self::S3];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PowerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.index())
    }
}

/// A classified segment; `None` is a level matching no state.
pub type Label = Option<PowerState>;

pub fn label_name(label: Label) -> String {
    label.map_or_else(|| "UNKNOWN".to_owned(), |s| s.to_string())
}

/// Current levels of the power state machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfsmParams {
    pub i_idle: f64,
    pub i_network: f64,
    pub i_load: f64,
    pub i_hash: f64,
    /// Period of the idle/network alternation during long transfers, seconds.
    pub network_period: f64,
    pub noise_sigma: f64,
}

impl Default for PfsmParams {
    fn default() -> Self {
        Self {
            i_idle: 0.870,
            i_network: 1.36,
            i_load: 2.34,
            i_hash: 1.58,
            network_period: 100e-6,
            noise_sigma: 0.0,
        }
    }
}

impl PfsmParams {
    pub fn level(&self, state: PowerState) -> f64 {
        match state {
            PowerState::S0 => self.i_idle,
            PowerState::S1 => self.i_network,
            PowerState::S2 => self.i_load,
            PowerState::S3 => self.i_hash,
        }
    }

    pub fn levels(&self) -> [f64; 4] {
        PowerState::ALL.map(|s| self.level(s))
    }

    pub fn validate(&self) -> Result<(), PowerError> {
        let levels = self.levels();
        if levels.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(PowerError::InvalidParameter("current levels must be positive"));
        }
        if !(self.network_period > 0.0) || !(self.noise_sigma >= 0.0) {
            return Err(PowerError::InvalidParameter("network period must be positive and noise non-negative"));
        }
        Ok(())
    }

    /// True when every pair of levels is more than `3 * noise_sigma` apart.
    pub fn extractable(&self) -> bool {
        let l = self.levels();
        (0..4).all(|a| (a + 1..4).all(|b| (l[a] - l[b]).abs() > 3.0 * self.noise_sigma))
    }
}

/// Uniformly sampled current, amperes.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    pub samples: Vec<f64>,
    pub sampling_rate: f64,
}

impl PowerTrace {
    pub fn new(samples: Vec<f64>, sampling_rate: f64) -> Self {
        Self { samples, sampling_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `len / f_s`, seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sampling_rate
    }
}
