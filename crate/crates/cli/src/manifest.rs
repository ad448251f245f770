use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub value: serde_json::Value,
    pub source: String,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

/// Written next to every run's output. Contains no timestamps or paths so that
/// identical runs produce identical manifests.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub library_version: String,
    pub cli_version: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, Resolved>,
    pub tolerances: Option<Tolerances>,
    pub diagnostics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    pub status: String,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }
}
