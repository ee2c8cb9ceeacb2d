use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use housing_seasonality::io::fixtures::FIXTURE_VERSION;
use housing_seasonality::io::output::{to_json_string, write_text, Precision};
use serde::{Deserialize, Serialize};

use crate::run::Run;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub fixture_version: String,
    /// Seconds since the Unix epoch at the end of the run.
    pub timestamp: u64,
    pub full_precision: bool,
    pub run: Run,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(run: Run, full_precision: bool, outputs: Vec<PathBuf>) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or_default();
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            fixture_version: FIXTURE_VERSION.to_string(),
            timestamp,
            full_precision,
            run,
            outputs,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    /// Written at full precision so every resolved parameter survives a rerun.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        write_text(&path, &to_json_string(self, Precision::Full)?)?;
        Ok(path)
    }
}
