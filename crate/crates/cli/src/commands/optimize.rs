use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use poweralert::timing::{optimize_parameters, DetectionConfig, NetworkModel, TimingModel};
use serde::{Deserialize, Serialize};

use super::{detection_from_config, Format, Output};
use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeParams {
    /// Model files; the reference coefficients when absent.
    pub timing_model: Option<PathBuf>,
    pub network_model: Option<PathBuf>,
    pub sampling_rates: Vec<f64>,
    /// Everything but the sampling rate, which comes from the list.
    pub detection: DetectionConfig,
    pub format: Format,
}

#[derive(Serialize)]
struct Row {
    sampling_rate_hz: f64,
    sigma_s_us: f64,
    tolerance_us: f64,
    n_bytes: u64,
    c: u64,
    predicted_us: f64,
    network_tolerance_us: f64,
    grid_confirmed: bool,
}

impl OptimizeParams {
    pub fn from_config(
        timing_model: Option<PathBuf>,
        network_model: Option<PathBuf>,
        sampling_rates: Vec<f64>,
        cfg: &Config,
        format: Format,
    ) -> Result<Self, CliError> {
        if sampling_rates.is_empty() || sampling_rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(CliError::Usage("sampling rates must be positive".into()));
        }
        Ok(Self { timing_model, network_model, sampling_rates, detection: detection_from_config(cfg)?, format })
    }

    pub fn run(&self) -> Result<Output, CliError> {
        let timing = match &self.timing_model {
            Some(p) => TimingModel::from_kv(&read(p)?)?,
            None => TimingModel::reference(),
        };
        let network = match &self.network_model {
            Some(p) => NetworkModel::from_kv(&read(p)?)?,
            None => NetworkModel::reference(),
        };
        let mut rows = Vec::new();
        for &rate in &self.sampling_rates {
            let cfg = DetectionConfig { sampling_rate: rate, ..self.detection };
            let p = optimize_parameters(&timing, &network, &cfg)
                .map_err(|e| CliError::Infeasible(format!("sampling rate {rate} Hz: {e}")))?;
            rows.push(Row {
                sampling_rate_hz: rate,
                sigma_s_us: cfg.sigma_s(),
                tolerance_us: p.tolerance,
                n_bytes: p.n,
                c: p.c,
                predicted_us: p.predicted_us,
                network_tolerance_us: p.network_tolerance,
                grid_confirmed: p.grid_confirmed,
            });
        }
        let bytes = match self.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&rows).expect("json");
                s.push('\n');
                s.into_bytes()
            }
            Format::Csv => {
                let mut s = String::from(
                    "sampling_rate_hz,sigma_s_us,tolerance_us,n_bytes,c,predicted_us,network_tolerance_us,grid_confirmed\n",
                );
                for r in &rows {
                    writeln!(
                        s,
                        "{},{},{},{},{},{},{},{}",
                        r.sampling_rate_hz,
                        r.sigma_s_us,
                        r.tolerance_us,
                        r.n_bytes,
                        r.c,
                        r.predicted_us,
                        r.network_tolerance_us,
                        r.grid_confirmed
                    )
                    .unwrap();
                }
                s.into_bytes()
            }
        };
        Ok(Output { bytes, report: String::new() })
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(CliError::io(path.display().to_string()))
}
