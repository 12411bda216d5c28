use std::fmt::Write as _;
use std::path::PathBuf;

use poweralert::power::{
    classify_states, extract_power_states, label_name, read_trace_file, validate_language, ExtractionConfig,
    PfsmParams,
};
use serde::{Deserialize, Serialize};

use super::{pfsm_from_config, Output};
use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractParams {
    pub input: PathBuf,
    pub extraction: ExtractionConfig,
    /// Levels used to label the segments.
    pub pfsm: PfsmParams,
    pub level_tolerance: f64,
}

impl ExtractParams {
    pub fn from_config(input: PathBuf, cfg: &Config) -> Result<Self, CliError> {
        let d = ExtractionConfig::default();
        let threshold: f64 = cfg.get("extraction", "threshold", 0.0)?;
        let extraction = ExtractionConfig {
            lowpass1_window: cfg.get("extraction", "lowpass1_window", d.lowpass1_window)?,
            lowpass2_window: cfg.get("extraction", "lowpass2_window", d.lowpass2_window)?,
            threshold: (threshold > 0.0).then_some(threshold),
            min_segment: cfg.get("extraction", "min_segment", d.min_segment)?,
            merge_tolerance: cfg.get("extraction", "merge_tolerance", d.merge_tolerance)?,
        };
        Ok(Self {
            input,
            extraction,
            pfsm: pfsm_from_config(cfg, 0.0)?,
            level_tolerance: cfg.get("extraction", "level_tolerance", 0.1)?,
        })
    }

    /// Segment table with labels; the language verdict is a comment line.
    pub fn run(&self) -> Result<Output, CliError> {
        let trace = read_trace_file(&self.input)?;
        let segments = extract_power_states(&trace, &self.extraction)?;
        let labels = classify_states(&segments, &self.pfsm, self.level_tolerance);
        let accepted = validate_language(&labels);
        let mut s = String::new();
        writeln!(s, "# segments={} language_accepted={accepted}", segments.len()).unwrap();
        s.push_str("index,t_a_s,t_b_s,duration_s,mean_current_a,label\n");
        for (i, (seg, label)) in segments.iter().zip(&labels).enumerate() {
            writeln!(
                s,
                "{i},{},{},{},{},{}",
                seg.t_a,
                seg.t_b,
                seg.duration,
                seg.mean_current,
                label_name(*label)
            )
            .unwrap();
        }
        let mut distinct: Vec<String> = labels.iter().flatten().map(|l| l.to_string()).collect();
        distinct.sort();
        distinct.dedup();
        let report = format!("{} segments, states {}, language accepted: {accepted}\n", segments.len(), distinct.join(" "));
        Ok(Output { bytes: s.into_bytes(), report })
    }
}
