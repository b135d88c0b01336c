//! Run manifests. Each command that writes files also writes
//! `run_manifest.json` next to them, holding the fully resolved parameters,
//! so `lexisupport rerun <manifest>` repeats the run exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::fsio::{read_json, write_json};

pub const MANIFEST_FORMAT: u32 = 1;
pub const MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool_version: String,
    pub command: String,
    pub config_file: Option<String>,
    pub seed: Option<u64>,
    /// The command's resolved parameters, including input and output paths.
    pub parameters: serde_json::Value,
    pub outputs: Vec<String>,
    /// RFC 3339, UTC.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new<P: Serialize>(
        command: &str,
        config_file: Option<&Path>,
        seed: Option<u64>,
        parameters: &P,
        outputs: Vec<String>,
    ) -> Result<RunManifest> {
        Ok(RunManifest {
            format_version: MANIFEST_FORMAT,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_file: config_file.map(|p| p.display().to_string()),
            seed,
            parameters: serde_json::to_value(parameters).map_err(|e| CliError::internal(e.to_string()))?,
            outputs,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        })
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let m: RunManifest = read_json(path, "run manifest")?;
        if m.format_version != MANIFEST_FORMAT {
            return Err(CliError::usage(format!(
                "run manifest {}: unsupported format_version {}",
                path.display(),
                m.format_version
            )));
        }
        Ok(m)
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(MANIFEST_FILE), self)
    }
}
