//! The three game metrics with Monte Carlo standard errors.

use serde::{Deserialize, Serialize};

use super::GameTrace;

/// What the metrics need from one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub detected: bool,
    pub end_time: f64,
    /// `int_0^end I(t) dt`.
    pub hidden_time: f64,
    pub attestations: u64,
    /// Attestations lying entirely inside hidden time.
    pub hits: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameMetrics {
    pub p_detect: f64,
    /// Mean over runs of `hidden_time / end_time`.
    pub frac_inactive: f64,
    /// Hits over attestations, pooled over runs; zero without attestations.
    pub hit_ratio: f64,
    pub se_p_detect: f64,
    pub se_frac_inactive: f64,
    /// Delta-method standard error of the pooled ratio.
    pub se_hit_ratio: f64,
    pub runs: u64,
    pub detected: u64,
    pub attestations: u64,
    pub hits: u64,
}

/// Order-sensitive accumulation: adding the same summaries in the same order
/// gives bit-identical metrics.
#[derive(Debug, Clone, Default)]
pub struct MetricsAccumulator {
    runs: u64,
    detected: u64,
    frac_sum: f64,
    frac_sq: f64,
    att: u64,
    hits: u64,
    att_sq: f64,
    hits_sq: f64,
    cross: f64,
}

impl MetricsAccumulator {
    pub fn add(&mut self, s: &RunSummary) {
        self.runs += 1;
        self.detected += u64::from(s.detected);
        let f = s.hidden_time / s.end_time;
        self.frac_sum += f;
        self.frac_sq += f * f;
        let (a, h) = (s.attestations as f64, s.hits as f64);
        self.att += s.attestations;
        self.hits += s.hits;
        self.att_sq += a * a;
        self.hits_sq += h * h;
        self.cross += a * h;
    }

    pub fn finish(&self) -> GameMetrics {
        let n = self.runs.max(1) as f64;
        let p = self.detected as f64 / n;
        let mean_f = self.frac_sum / n;
        let var_f = if self.runs > 1 { ((self.frac_sq - n * mean_f * mean_f) / (n - 1.0)).max(0.0) } else { 0.0 };
        let (hit_ratio, se_hit) = if self.att == 0 {
            (0.0, 0.0)
        } else {
            let r = self.hits as f64 / self.att as f64;
            let a_bar = self.att as f64 / n;
            // sum (h_i - r a_i)^2 expanded over the running sums.
            let ss = (self.hits_sq - 2.0 * r * self.cross + r * r * self.att_sq).max(0.0);
            let se = if self.runs > 1 { (ss / (n * (n - 1.0))).sqrt() / a_bar } else { 0.0 };
            (r, se)
        };
        GameMetrics {
            p_detect: p,
            frac_inactive: mean_f,
            hit_ratio,
            se_p_detect: (p * (1.0 - p) / n).sqrt(),
            se_frac_inactive: (var_f / n).sqrt(),
            se_hit_ratio: se_hit,
            runs: self.runs,
            detected: self.detected,
            attestations: self.att,
            hits: self.hits,
        }
    }
}

pub fn compute_metrics(traces: &[GameTrace]) -> GameMetrics {
    let mut acc = MetricsAccumulator::default();
    for t in traces {
        acc.add(&t.summary());
    }
    acc.finish()
}
