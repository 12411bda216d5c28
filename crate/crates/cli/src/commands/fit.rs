use std::path::PathBuf;

use poweralert::timing::{fit_network_model, fit_timing_model, NetworkSample, TimingSample};
use serde::{Deserialize, Serialize};

use super::Output;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    /// Columns `n,c,t_us`.
    Timing,
    /// Columns `bytes,t_us`.
    Network,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub kind: FitKind,
    pub input: PathBuf,
}

impl FitParams {
    fn columns(&self) -> &'static [&'static str] {
        match self.kind {
            FitKind::Timing => &["n", "c", "t_us"],
            FitKind::Network => &["bytes", "t_us"],
        }
    }

    /// Rows of numbers under the expected header. Errors carry the byte
    /// offset of the offending record.
    fn read_rows(&self) -> Result<Vec<Vec<f64>>, CliError> {
        let file = std::fs::File::open(&self.input).map_err(CliError::io(self.input.display().to_string()))?;
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(file);
        let want = self.columns();
        let header = reader.headers().map_err(|e| csv_error(&e))?.clone();
        if header.iter().ne(want.iter().copied()) {
            return Err(CliError::Format(format!(
                "byte offset 0: header must be {}, found {}",
                want.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(&e))?;
            let offset = record.position().map_or(0, |p| p.byte());
            let row = record
                .iter()
                .zip(want)
                .map(|(v, col)| {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| CliError::Format(format!("byte offset {offset}: column {col} is not a number: {v:?}")))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
        }
        Ok(rows)
    }

    pub fn run(&self) -> Result<Output, CliError> {
        let rows = self.read_rows()?;
        let text = match self.kind {
            FitKind::Timing => {
                let samples: Vec<TimingSample> =
                    rows.iter().map(|r| TimingSample { n: r[0], c: r[1], t_us: r[2] }).collect();
                fit_timing_model(&samples)?.to_kv()
            }
            FitKind::Network => {
                let samples: Vec<NetworkSample> = rows.iter().map(|r| NetworkSample { bytes: r[0], t_us: r[1] }).collect();
                fit_network_model(&samples)?.to_kv()
            }
        };
        Ok(Output { report: format!("fitted {} samples\n", rows.len()), bytes: text.into_bytes() })
    }
}

fn csv_error(e: &csv::Error) -> CliError {
    let offset = e.position().map_or(0, |p| p.byte());
    CliError::Format(format!("byte offset {offset}: {e}"))
}
