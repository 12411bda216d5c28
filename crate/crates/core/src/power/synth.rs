//! Trace synthesis from phase lists.

use rand::RngCore;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{PfsmParams, PowerError, PowerState, PowerTrace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    /// Constant level for `duration` seconds.
    Level(PowerState, f64),
    /// Transfer of `duration` seconds, expanded into network bursts
    /// separated by half-period idle gaps.
    LongNetwork(f64),
}

impl Phase {
    pub fn duration(&self) -> f64 {
        match *self {
            Phase::Level(_, d) | Phase::LongNetwork(d) => d,
        }
    }
}

/// Expands long transfers into `(state, duration)` pieces.
///
/// A transfer of span `D` with period `T` becomes
/// `n = max(1, floor((D + T/2) / T))` bursts with `T/2` gaps between them;
/// the total span stays `D`.
pub fn expand_phases(phases: &[Phase], network_period: f64) -> Vec<(PowerState, f64)> {
    let half = network_period / 2.0;
    let mut out = Vec::new();
    for phase in phases {
        match *phase {
            Phase::Level(s, d) => out.push((s, d)),
            Phase::LongNetwork(d) => {
                let n = ((d + half) / network_period).floor().max(1.0) as usize;
                let burst = (d - (n - 1) as f64 * half) / n as f64;
                for i in 0..n {
                    if i > 0 {
                        out.push((PowerState::S0, half));
                    }
                    out.push((PowerState::S1, burst));
                }
            }
        }
    }
    out
}

/// Piecewise-constant trace at the state levels plus i.i.d. Gaussian noise.
///
/// Phase boundaries are placed at `round(t * f_s)` of the cumulative time,
/// so the sample count is `round(sum(duration) * f_s)`.
pub fn synthesize_trace<R: RngCore + ?Sized>(
    phases: &[Phase],
    params: &PfsmParams,
    sampling_rate: f64,
    rng: &mut R,
) -> Result<PowerTrace, PowerError> {
    params.validate()?;
    if !(sampling_rate > 0.0 && sampling_rate.is_finite()) {
        return Err(PowerError::InvalidParameter("sampling rate must be positive"));
    }
    if phases.iter().any(|p| !(p.duration() > 0.0 && p.duration().is_finite())) {
        return Err(PowerError::InvalidParameter("phase durations must be positive"));
    }
    let pieces = expand_phases(phases, params.network_period);
    let mut samples = Vec::new();
    let mut t = 0.0;
    for (state, d) in pieces {
        t += d;
        let end = (t * sampling_rate).round() as usize;
        samples.resize(end.max(samples.len()), params.level(state));
    }
    if params.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, params.noise_sigma).expect("sigma is positive and finite");
        for s in &mut samples {
            *s += noise.sample(rng);
        }
    }
    Ok(PowerTrace::new(samples, sampling_rate))
}

/// Durations of the phases of one attestation round, seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundPhases {
    pub lead_in: f64,
    /// Span of the challenge transfer.
    pub network: f64,
    pub gap: f64,
    pub load: f64,
    pub hash: f64,
    pub output: f64,
}

/// Phase list of a round: idle lead-in, challenge transfer, idle gap, load,
/// hash, idle gap, response transfer.
pub fn round_phases(r: &RoundPhases) -> Vec<Phase> {
    vec![
        Phase::Level(PowerState::S0, r.lead_in),
        Phase::LongNetwork(r.network),
        Phase::Level(PowerState::S0, r.gap),
        Phase::Level(PowerState::S2, r.load),
        Phase::Level(PowerState::S3, r.hash),
        Phase::Level(PowerState::S0, r.gap),
        Phase::Level(PowerState::S1, r.output),
    ]
}
