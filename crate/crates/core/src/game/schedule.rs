//! The attacker's hide schedule.
//!
//! Hide interval `i` starts at `s_i` and lasts `alpha1`; index 0 is the
//! interval that begins one period before the phase, so that time 0 is always
//! at or after `s_0`. A hide interval that reaches the next start is
//! contiguous with it.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Schedule {
    /// `s_i = phase + (i - 1) period`.
    Periodic { phase: f64, period: f64, hide: f64 },
    /// Start times drawn once up to the horizon; `hidden_before[i]` is the
    /// hidden time in `[s_0, s_i)`.
    Jittered {
        starts: Vec<f64>,
        hidden_before: Vec<f64>,
        hide: f64,
    },
}

impl Schedule {
    pub fn periodic(phase: f64, period: f64, hide: f64) -> Self {
        Self::Periodic { phase, period, hide }
    }

    /// Renewal schedule whose gaps are `period (1 + U(-jitter, jitter))`.
    ///
    /// Starts are written `phase + (i - 1) period + period J_i` with `J_i` the
    /// cumulative jitter, so a zero jitter reproduces the periodic starts
    /// exactly.
    pub fn jittered<R: Rng + ?Sized>(phase: f64, period: f64, hide: f64, jitter: f64, horizon: f64, rng: &mut R) -> Self {
        let mut starts = Vec::new();
        let mut cum = 0.0;
        let mut i = 0u64;
        loop {
            let s = phase + (i as f64 - 1.0) * period + period * cum;
            starts.push(s);
            if s > horizon {
                break;
            }
            let u: f64 = rng.gen();
            cum += jitter * (2.0 * u - 1.0);
            i += 1;
        }
        let mut hidden_before = Vec::with_capacity(starts.len());
        let mut acc = 0.0;
        for (k, &s) in starts.iter().enumerate() {
            hidden_before.push(acc);
            if let Some(&next) = starts.get(k + 1) {
                acc += hide.min(next - s);
            }
        }
        Self::Jittered { starts, hidden_before, hide }
    }

    fn start(&self, i: usize) -> f64 {
        match self {
            Self::Periodic { phase, period, .. } => phase + (i as f64 - 1.0) * period,
            Self::Jittered { starts, .. } => starts.get(i).copied().unwrap_or(f64::INFINITY),
        }
    }

    fn hide(&self) -> f64 {
        match self {
            Self::Periodic { hide, .. } | Self::Jittered { hide, .. } => *hide,
        }
    }

    /// Whether the attacker is hidden at `t >= 0`; this is `I(t)`.
    pub fn hidden_at(&self, t: f64) -> bool {
        let mut c = Cursor::default();
        c.seek(self, t);
        t < self.start(c.i) + self.hide()
    }

    /// `int_0^y I(t) dt` in closed form.
    pub fn hidden_time(&self, y: f64) -> f64 {
        self.hidden_since_first(y) - self.hidden_since_first(0.0)
    }

    /// Hidden time in `[s_0, y)`.
    fn hidden_since_first(&self, y: f64) -> f64 {
        match self {
            Self::Periodic { phase, period, hide } => {
                let s = y - (phase - period);
                let k = (s / period).floor();
                let rem = s - k * period;
                k * hide.min(*period) + rem.min(*hide)
            }
            Self::Jittered { starts, hidden_before, hide } => {
                let i = starts.partition_point(|&s| s <= y).saturating_sub(1);
                let next = starts.get(i + 1).copied().unwrap_or(f64::INFINITY);
                hidden_before[i] + (y - starts[i]).min(*hide).min(next - starts[i])
            }
        }
    }
}

/// Position in the schedule for non-decreasing query times.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cursor {
    i: usize,
}

impl Cursor {
    /// Moves to the last interval starting at or before `t`.
    fn seek(&mut self, sched: &Schedule, t: f64) {
        while sched.start(self.i + 1) <= t {
            self.i += 1;
        }
    }

    /// Whether `[t, t + len)` lies entirely inside hidden time.
    pub fn covers(&mut self, sched: &Schedule, t: f64, len: f64) -> bool {
        self.seek(sched, t);
        let hide = sched.hide();
        let mut j = self.i;
        let mut end = sched.start(j) + hide;
        if t >= end {
            return false;
        }
        // Walk across contiguous intervals until the span is covered or a
        // visible gap appears.
        while t + len > end {
            let next = sched.start(j + 1);
            if next > end {
                return false;
            }
            j += 1;
            end = next + hide;
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn numeric_hidden(s: &Schedule, y: f64, steps: usize) -> f64 {
        let dt = y / steps as f64;
        (0..steps).filter(|&k| s.hidden_at((k as f64 + 0.5) * dt)).count() as f64 * dt
    }

    #[test]
    fn periodic_membership() {
        let s = Schedule::periodic(3.0, 10.0, 5.0);
        assert!(!s.hidden_at(0.0));
        assert!(s.hidden_at(3.0));
        assert!(s.hidden_at(7.9));
        assert!(!s.hidden_at(8.0));
        assert!(s.hidden_at(13.5));
        let s = Schedule::periodic(8.0, 10.0, 5.0);
        // The interval starting at -2 still covers [0, 3).
        assert!(s.hidden_at(0.0) && s.hidden_at(2.9) && !s.hidden_at(3.0));
    }

    #[test]
    fn closed_form_integral() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let period = rng.gen_range(1.0..20.0);
            let hide = period * rng.gen_range(0.05..1.0);
            let phase = rng.gen_range(0.0..period);
            let y = rng.gen_range(0.0..200.0);
            let s = Schedule::periodic(phase, period, hide);
            let num = numeric_hidden(&s, y, 200_000);
            assert!((s.hidden_time(y) - num).abs() < 1e-2, "{} vs {num}", s.hidden_time(y));
            let j = Schedule::jittered(phase, period, hide, 0.3, y, &mut rng);
            let num = numeric_hidden(&j, y, 200_000);
            assert!((j.hidden_time(y) - num).abs() < 1e-2);
        }
    }

    #[test]
    fn half_schedule_integrates_to_half() {
        let s = Schedule::periodic(1.234, 60.0, 30.0);
        let y = 600.0;
        assert!((s.hidden_time(y) / y - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_jitter_is_periodic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Schedule::periodic(2.5, 7.0, 3.5);
        let j = Schedule::jittered(2.5, 7.0, 3.5, 0.0, 1000.0, &mut rng);
        for k in 0..140 {
            assert_eq!(p.start(k), j.start(k));
        }
        for y in [0.0, 1.0, 99.5, 999.0] {
            assert!((p.hidden_time(y) - j.hidden_time(y)).abs() < 1e-9);
        }
    }

    #[test]
    fn covering() {
        let s = Schedule::periodic(0.0, 10.0, 5.0);
        let mut c = Cursor::default();
        assert!(c.covers(&s, 1.0, 4.0));
        assert!(!c.covers(&s, 1.5, 4.0));
        assert!(!c.covers(&s, 6.0, 0.1));
        let always = Schedule::periodic(0.3, 10.0, 10.0);
        let mut c = Cursor::default();
        for t in [0.0, 9.9, 10.25, 55.0] {
            assert!(c.covers(&always, t, 3.0));
        }
    }
}
