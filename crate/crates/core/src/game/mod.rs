//! Continuous-time attacker-verifier game.
//!
//! The verifier attests at the arrivals of a Poisson process of rate
//! `lambda0`; each attestation occupies `[t_v, t_v + alpha0)`. The attacker
//! hides for `alpha1` at the start of every period `t1`, with a phase drawn
//! uniformly per run. An attestation during which the attacker is visible at
//! any instant detects with probability `1 - p_e`, and detection ends the run.
//!
//! The simulation is event-driven: only verifier arrivals are visited.
//! Detection draws are taken up front as the index of the first successful
//! Bernoulli trial among visible attestations, so a run costs one exponential
//! draw per attestation.

mod metrics;
mod schedule;
mod sweep;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Geometric};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use metrics::{compute_metrics, GameMetrics, MetricsAccumulator, RunSummary};
pub use schedule::{Cursor, Schedule};
pub use sweep::{
    best_response_probe, default_grid, run_cell, sweep, write_csv, write_json, ProbeReport, ProbeRow, SweepGrid,
    SweepRow, CSV_HEADER,
};

use crate::splitmix64;

/// Attestation time used by the game, seconds.
pub const ALPHA0: f64 = 903e-6;
/// Evasion probability for 2331 covered bytes out of 200 MiB.
pub const P_EVADE: f64 = 0.99998;
/// Ten days, seconds.
pub const TEN_DAYS: f64 = 864_000.0;

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AttackerStrategy {
    Periodic,
    /// Periods of `t1 (1 + U(-jitter, jitter))`, same mean rate.
    Jittered { jitter: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    /// Verifier rate, 1/s. Zero disables the verifier.
    pub lambda0: f64,
    /// Attacker period, seconds.
    pub t1: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub p_e: f64,
    pub horizon: f64,
    pub runs: u64,
    pub seed: u64,
    pub attacker: AttackerStrategy,
}

impl GameConfig {
    /// Default game for one grid cell: `alpha1 = t1 / 2`, ten days.
    pub fn new(t0: f64, t1: f64) -> Self {
        Self {
            lambda0: if t0.is_finite() { 1.0 / t0 } else { 0.0 },
            t1,
            alpha0: ALPHA0,
            alpha1: t1 / 2.0,
            p_e: P_EVADE,
            horizon: TEN_DAYS,
            runs: 1000,
            seed: 0,
            attacker: AttackerStrategy::Periodic,
        }
    }

    pub fn lambda1(&self) -> f64 {
        1.0 / self.t1
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let bad = |m: &str| Err(GameError::InvalidConfig(m.to_string()));
        if !(self.lambda0 >= 0.0 && self.lambda0.is_finite()) {
            return bad("lambda0 must be finite and >= 0");
        }
        if !(self.t1 > 0.0 && self.t1.is_finite()) {
            return bad("t1 must be finite and > 0");
        }
        if !(self.alpha1 >= 0.0 && self.alpha1 <= self.t1) {
            return bad("alpha1 must lie in [0, t1]");
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return bad("alpha0 must be finite and > 0");
        }
        if !(0.0..=1.0).contains(&self.p_e) {
            return bad("p_e must lie in [0, 1]");
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("horizon must be finite and > 0");
        }
        if let AttackerStrategy::Jittered { jitter } = self.attacker {
            if !(0.0..1.0).contains(&jitter) {
                return bad("jitter must lie in [0, 1)");
            }
        }
        Ok(())
    }

    /// Seed of run `run`; the jitter stream uses a separate derivation so
    /// strategies share phase, detection and arrival draws.
    pub fn run_seed(&self, run: u64) -> u64 {
        splitmix64(self.seed ^ splitmix64(run))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Pass,
    Detect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifierAction {
    pub time: f64,
    pub outcome: Outcome,
    /// The attestation lay entirely inside hidden time.
    pub hidden: bool,
}

/// Full record of one run: both players' moves and the outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameTrace {
    pub verifier_actions: Vec<VerifierAction>,
    pub schedule: Schedule,
    pub end_time: f64,
    pub detected: bool,
}

impl GameTrace {
    /// Attacker activity `c(t)`: false while hidden.
    pub fn active_at(&self, t: f64) -> bool {
        !self.schedule.hidden_at(t)
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            detected: self.detected,
            end_time: self.end_time,
            hidden_time: self.schedule.hidden_time(self.end_time),
            attestations: self.verifier_actions.len() as u64,
            hits: self.verifier_actions.iter().filter(|a| a.hidden).count() as u64,
        }
    }
}

/// Per-run randomness in draw order: phase, detection index, then verifier
/// inter-arrival times.
pub struct RunDraws {
    pub rng: ChaCha8Rng,
    pub phase: f64,
    /// 1-based index of the visible attestation that detects.
    pub detect_at: u64,
}

pub fn draw_run(cfg: &GameConfig, run: u64) -> (RunDraws, Schedule) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run_seed(run));
    let phase = rng.gen::<f64>() * cfg.t1;
    let detect_at = if cfg.p_e >= 1.0 {
        u64::MAX
    } else {
        let g = Geometric::new(1.0 - cfg.p_e).expect("probability in (0, 1]");
        g.sample(&mut rng).saturating_add(1)
    };
    let schedule = match cfg.attacker {
        AttackerStrategy::Periodic => Schedule::periodic(phase, cfg.t1, cfg.alpha1),
        AttackerStrategy::Jittered { jitter } => {
            let mut jrng = ChaCha8Rng::seed_from_u64(splitmix64(cfg.run_seed(run) ^ 0x6A09_E667_F3BC_C908));
            Schedule::jittered(phase, cfg.t1, cfg.alpha1, jitter, cfg.horizon, &mut jrng)
        }
    };
    (RunDraws { rng, phase, detect_at }, schedule)
}

/// Drives one run, reporting every attestation to `on_action`. Returns the
/// end time and whether the run ended in detection.
fn play<F: FnMut(VerifierAction)>(cfg: &GameConfig, draws: &mut RunDraws, sched: &Schedule, mut on_action: F) -> (f64, bool) {
    if cfg.lambda0 <= 0.0 {
        return (cfg.horizon, false);
    }
    let mean = 1.0 / cfg.lambda0;
    let mut cursor = Cursor::default();
    let mut visible = 0u64;
    let mut t = 0.0;
    loop {
        let gap: f64 = Exp1.sample(&mut draws.rng);
        t += gap * mean;
        if t >= cfg.horizon {
            return (cfg.horizon, false);
        }
        let hidden = cursor.covers(sched, t, cfg.alpha0);
        let mut outcome = Outcome::Pass;
        if !hidden {
            visible += 1;
            if visible == draws.detect_at {
                outcome = Outcome::Detect;
            }
        }
        on_action(VerifierAction { time: t, outcome, hidden });
        if outcome == Outcome::Detect {
            return ((t + cfg.alpha0).min(cfg.horizon), true);
        }
    }
}

/// Simulates run `run` of `cfg` and keeps every action.
pub fn simulate_run(cfg: &GameConfig, run: u64) -> Result<GameTrace, GameError> {
    cfg.validate()?;
    let (mut draws, schedule) = draw_run(cfg, run);
    let mut actions = Vec::new();
    let (end_time, detected) = play(cfg, &mut draws, &schedule, |a| actions.push(a));
    Ok(GameTrace { verifier_actions: actions, schedule, end_time, detected })
}

/// Same run as [`simulate_run`] without storing actions.
pub fn simulate_summary(cfg: &GameConfig, run: u64) -> Result<RunSummary, GameError> {
    cfg.validate()?;
    Ok(summary_unchecked(cfg, run))
}

pub(crate) fn summary_unchecked(cfg: &GameConfig, run: u64) -> RunSummary {
    let (mut draws, schedule) = draw_run(cfg, run);
    let mut attestations = 0u64;
    let mut hits = 0u64;
    let (end_time, detected) = play(cfg, &mut draws, &schedule, |a| {
        attestations += 1;
        hits += u64::from(a.hidden);
    });
    RunSummary {
        detected,
        end_time,
        hidden_time: schedule.hidden_time(end_time),
        attestations,
        hits,
    }
}
