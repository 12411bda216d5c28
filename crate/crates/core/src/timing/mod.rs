//! Execution and network time models, timing alarms and the search for the
//! smallest detectable program parameters.
//!
//! All times are microseconds.

mod detect;
mod model;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use detect::{
    detect_hash_phase, detect_network_phase, optimize_parameters, sampling_error_us, Constraint, DetectionConfig,
    OptimizedParams,
};
pub use model::{fit_network_model, fit_timing_model, NetworkModel, NetworkSample, TimingModel, TimingSample};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimingError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("singular design: {0}")]
    Singular(&'static str),
    #[error("infeasible: {constraint} ({detail})")]
    Infeasible { constraint: Constraint, detail: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("model file line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub(crate) fn parse_kv(text: &str) -> Result<BTreeMap<String, (usize, String)>, TimingError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| TimingError::Parse {
            line: i + 1,
            reason: "expected key=value".into(),
        })?;
        map.insert(k.trim().to_owned(), (i + 1, v.trim().to_owned()));
    }
    Ok(map)
}

pub(crate) fn kv_f64(map: &BTreeMap<String, (usize, String)>, key: &str) -> Result<f64, TimingError> {
    let (line, v) = map.get(key).ok_or_else(|| TimingError::Parse {
        line: 0,
        reason: format!("missing key {key}"),
    })?;
    v.parse().map_err(|_| TimingError::Parse {
        line: *line,
        reason: format!("{key} is not a number"),
    })
}

pub(crate) struct Kv<'a>(pub &'a [(&'a str, f64)]);

impl fmt::Display for Kv<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.0 {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
