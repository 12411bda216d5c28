//! Grid sweeps over verifier and attacker periods, and the periodic versus
//! jittered comparison.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{summary_unchecked, AttackerStrategy, GameConfig, GameError, GameMetrics, MetricsAccumulator};
use crate::splitmix64;

pub const CSV_HEADER: &str = "T0_s,T1_s,lambda0,lambda1,p_detect,frac_inactive,hit_ratio,runs,horizon_s";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    /// Mean verifier inter-arrival times, seconds; infinity disables the
    /// verifier.
    pub t0_values: Vec<f64>,
    pub t1_values: Vec<f64>,
}

/// T1 from 30 s to 300 s in 10 s steps, T0 from 60 s to 180 s in 15 s steps.
pub fn default_grid() -> SweepGrid {
    SweepGrid {
        t0_values: (0..9).map(|i| 60.0 + 15.0 * f64::from(i)).collect(),
        t1_values: (0..28).map(|i| 30.0 + 10.0 * f64::from(i)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "T0_s")]
    pub t0_s: f64,
    #[serde(rename = "T1_s")]
    pub t1_s: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub p_detect: f64,
    pub frac_inactive: f64,
    pub hit_ratio: f64,
    pub runs: u64,
    pub horizon_s: f64,
    #[serde(skip)]
    pub metrics: Option<GameMetrics>,
}

/// Runs every run of one configuration, in run order.
pub fn run_cell(cfg: &GameConfig) -> Result<GameMetrics, GameError> {
    cfg.validate()?;
    let mut acc = MetricsAccumulator::default();
    for run in 0..cfg.runs {
        acc.add(&summary_unchecked(cfg, run));
    }
    Ok(acc.finish())
}

/// One row per `(T0, T1)`, T0-major. `template` supplies everything but the
/// two periods; `alpha1` is taken as the same fraction of each `T1` as in the
/// template. Cell seeds derive from the template seed and the cell index.
pub fn sweep(grid: &SweepGrid, template: &GameConfig) -> Result<Vec<SweepRow>, GameError> {
    if grid.t0_values.is_empty() || grid.t1_values.is_empty() {
        return Err(GameError::InvalidConfig("empty sweep grid".into()));
    }
    let hide_fraction = template.alpha1 / template.t1;
    let periods: Vec<(f64, f64)> =
        grid.t0_values.iter().flat_map(|&t0| grid.t1_values.iter().map(move |&t1| (t0, t1))).collect();
    let cells: Vec<GameConfig> = periods
        .iter()
        .enumerate()
        .map(|(i, &(t0, t1))| GameConfig {
            lambda0: if t0.is_finite() { 1.0 / t0 } else { 0.0 },
            t1,
            alpha1: hide_fraction * t1,
            seed: splitmix64(template.seed ^ splitmix64(0xC311 ^ i as u64)),
            ..template.clone()
        })
        .collect();
    for c in &cells {
        c.validate()?;
    }
    // Collecting an indexed parallel iterator keeps grid order.
    let metrics: Vec<GameMetrics> = cells.par_iter().map(|c| run_cell(c).expect("validated")).collect();
    Ok(cells
        .iter()
        .zip(&periods)
        .zip(metrics)
        .map(|((c, &(t0, _)), m)| SweepRow {
            t0_s: t0,
            t1_s: c.t1,
            lambda0: c.lambda0,
            lambda1: c.lambda1(),
            p_detect: m.p_detect,
            frac_inactive: m.frac_inactive,
            hit_ratio: m.hit_ratio,
            runs: c.runs,
            horizon_s: c.horizon,
            metrics: Some(m),
        })
        .collect())
}

/// CSV with shortest round-trip float formatting.
pub fn write_csv<W: Write>(rows: &[SweepRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.t0_s, r.t1_s, r.lambda0, r.lambda1, r.p_detect, r.frac_inactive, r.hit_ratio, r.runs, r.horizon_s
        )?;
    }
    Ok(())
}

/// JSON array of rows; an infinite T0 is written as `null`.
pub fn write_json<W: Write>(rows: &[SweepRow], mut w: W) -> io::Result<()> {
    let json = serde_json::to_string_pretty(rows).map_err(io::Error::other)?;
    writeln!(w, "{json}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub jitter: f64,
    pub p_detect: f64,
    /// 95% normal-approximation interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub frac_inactive: f64,
    pub hit_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub lambda0: f64,
    pub t1: f64,
    pub runs: u64,
    /// First row is the periodic attacker.
    pub rows: Vec<ProbeRow>,
    /// Periodic p_detect is not significantly above any jittered one at the
    /// 95% level.
    pub periodic_not_worse: bool,
}

/// Compares a periodic attacker against jittered attackers of the same mean
/// period. All strategies share per-run seeds, so phase, detection index and
/// verifier arrivals are common.
pub fn best_response_probe(cfg: &GameConfig, jitters: &[f64]) -> Result<ProbeReport, GameError> {
    let mut strategies = vec![(0.0, AttackerStrategy::Periodic)];
    strategies.extend(jitters.iter().map(|&j| (j, AttackerStrategy::Jittered { jitter: j })));
    let mut rows = Vec::new();
    let mut ses = Vec::new();
    for (jitter, attacker) in strategies {
        let m = run_cell(&GameConfig { attacker, ..cfg.clone() })?;
        let half = 1.96 * m.se_p_detect;
        rows.push(ProbeRow {
            jitter,
            p_detect: m.p_detect,
            ci_low: (m.p_detect - half).max(0.0),
            ci_high: (m.p_detect + half).min(1.0),
            frac_inactive: m.frac_inactive,
            hit_ratio: m.hit_ratio,
        });
        ses.push(m.se_p_detect);
    }
    let base = rows[0].p_detect;
    let periodic_not_worse = rows
        .iter()
        .zip(&ses)
        .skip(1)
        .all(|(r, se)| base - r.p_detect <= 1.96 * (ses[0].powi(2) + se.powi(2)).sqrt());
    Ok(ProbeReport { lambda0: cfg.lambda0, t1: cfg.t1, runs: cfg.runs, rows, periodic_not_worse })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GameConfig {
        GameConfig { runs: 20, horizon: 3600.0, p_e: 0.99, seed: 9, ..GameConfig::new(60.0, 60.0) }
    }

    #[test]
    fn default_grid_size() {
        let g = default_grid();
        assert_eq!(g.t0_values.len() * g.t1_values.len(), 252);
        assert_eq!(*g.t1_values.last().unwrap(), 300.0);
        assert_eq!(*g.t0_values.last().unwrap(), 180.0);
    }

    #[test]
    fn sweep_is_reproducible_and_ordered() {
        let grid = SweepGrid { t0_values: vec![60.0, f64::INFINITY], t1_values: vec![30.0, 120.0] };
        let a = sweep(&grid, &small()).unwrap();
        let b = sweep(&grid, &small()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert_eq!((a[1].t0_s, a[1].t1_s), (60.0, 120.0));
        assert!(a[2].t0_s.is_infinite() && a[2].p_detect == 0.0);
        let mut csv = Vec::new();
        write_csv(&a, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(text.lines().count(), 5);
        let mut json = Vec::new();
        write_json(&a, &mut json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v[0]["T1_s"], 30.0);
    }

    #[test]
    fn empty_grid_rejected() {
        let grid = SweepGrid { t0_values: vec![], t1_values: vec![30.0] };
        assert!(sweep(&grid, &small()).is_err());
    }

    #[test]
    fn zero_jitter_matches_periodic() {
        let r = best_response_probe(&small(), &[0.0]).unwrap();
        assert_eq!(r.rows[0].p_detect, r.rows[1].p_detect);
        assert_eq!(r.rows[0].hit_ratio, r.rows[1].hit_ratio);
        assert!(r.periodic_not_worse);
    }
}
