//! Run manifests: everything needed to regenerate an output file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::commands::Job;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub crc32: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// Fully resolved parameters; config files are not consulted on replay.
    pub job: Job,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(job: Job, out: &Path) -> Result<Self, CliError> {
        let inputs = job
            .inputs()
            .into_iter()
            .map(|path| Ok(InputFile { crc32: file_crc(&path)?, path }))
            .collect::<Result<_, CliError>>()?;
        Ok(Self {
            tool: "poweralert".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: job.name().into(),
            seed: job.seed(),
            job,
            inputs,
            outputs: vec![out.to_path_buf()],
        })
    }

    pub fn path_for(out: &Path) -> PathBuf {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn write(&self, out: &Path) -> Result<(), CliError> {
        let path = Self::path_for(out);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(CliError::io(path.display().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path.display().to_string()))?;
        serde_json::from_str(&text).map_err(|e| CliError::Format(format!("manifest {}: {e}", path.display())))
    }

    /// Inputs must be unchanged since the manifest was written.
    pub fn check_inputs(&self) -> Result<(), CliError> {
        for input in &self.inputs {
            let crc = file_crc(&input.path)?;
            if crc != input.crc32 {
                return Err(CliError::Format(format!(
                    "input {} changed since the manifest was written (crc {crc:#010x}, recorded {:#010x})",
                    input.path.display(),
                    input.crc32
                )));
            }
        }
        Ok(())
    }
}

fn file_crc(path: &Path) -> Result<u32, CliError> {
    let bytes = std::fs::read(path).map_err(CliError::io(path.display().to_string()))?;
    Ok(crc32fast::hash(&bytes))
}
