use poweralert::game::{sweep, write_csv, write_json, GameConfig, SweepGrid, ALPHA0, P_EVADE, TEN_DAYS};
use serde::{Deserialize, Serialize};

use super::{Format, Output};
use crate::config::{parse_f64_list, Config};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSweepParams {
    /// Mean verifier inter-arrival times, seconds.
    pub t0_values: Vec<f64>,
    pub t1_values: Vec<f64>,
    /// Adds a column with the verifier switched off.
    pub include_idle_verifier: bool,
    pub runs: u64,
    pub horizon: f64,
    pub alpha0: f64,
    /// `alpha1 / t1`.
    pub hide_fraction: f64,
    pub p_e: f64,
    pub seed: u64,
    pub format: Format,
}

impl GameSweepParams {
    pub fn from_config(cfg: &Config, seed: Option<u64>, runs: Option<u64>, format: Format) -> Result<Self, CliError> {
        let list = |key: &str, default: &str| -> Result<Vec<f64>, CliError> {
            let text = cfg.raw("grid", key).unwrap_or(default).to_owned();
            let v = parse_f64_list(&text).map_err(|e| cfg.invalid("grid", key, &e))?;
            if v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(cfg.invalid("grid", key, "periods must be positive"));
            }
            Ok(v)
        };
        let p = Self {
            t0_values: list("t0", "60:180:15")?,
            t1_values: list("t1", "30:300:10")?,
            include_idle_verifier: cfg.get("grid", "include_idle_verifier", false)?,
            runs: match runs {
                Some(r) => r,
                None => cfg.get("game", "runs", 1000)?,
            },
            horizon: cfg.get("game", "horizon", TEN_DAYS)?,
            alpha0: cfg.get("game", "alpha0", ALPHA0)?,
            hide_fraction: cfg.get("game", "hide_fraction", 0.5)?,
            p_e: cfg.get("game", "p_e", P_EVADE)?,
            seed: match seed {
                Some(s) => s,
                None => cfg.get("", "seed", 0)?,
            },
            format,
        };
        if p.t0_values.is_empty() && !p.include_idle_verifier || p.t1_values.is_empty() {
            return Err(CliError::Usage("empty sweep grid".into()));
        }
        if p.runs == 0 {
            return Err(cfg.invalid("game", "runs", "must be >= 1"));
        }
        p.template().validate()?;
        Ok(p)
    }

    fn template(&self) -> GameConfig {
        let t1 = self.t1_values.first().copied().unwrap_or(1.0);
        GameConfig {
            alpha0: self.alpha0,
            alpha1: self.hide_fraction * t1,
            p_e: self.p_e,
            horizon: self.horizon,
            runs: self.runs,
            seed: self.seed,
            ..GameConfig::new(f64::INFINITY, t1)
        }
    }

    pub fn run(&self) -> Result<Output, CliError> {
        let mut t0_values = self.t0_values.clone();
        if self.include_idle_verifier {
            t0_values.push(f64::INFINITY);
        }
        let grid = SweepGrid { t0_values, t1_values: self.t1_values.clone() };
        let start = std::time::Instant::now();
        let rows = sweep(&grid, &self.template())?;
        let elapsed = start.elapsed();
        let mut bytes = Vec::new();
        match self.format {
            Format::Csv => write_csv(&rows, &mut bytes),
            Format::Json => write_json(&rows, &mut bytes),
        }
        .expect("writing to memory");
        let report = format!("{} cells x {} runs in {:.2} s\n", rows.len(), self.runs, elapsed.as_secs_f64());
        Ok(Output { bytes, report })
    }
}
