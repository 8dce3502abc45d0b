use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{ProbeError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Provenance record written once into every output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub notes: Vec<String>,
    pub started_at_unix: u64,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| ProbeError::input(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub(crate) struct ManifestBuilder {
    manifest: RunManifest,
    started: Instant,
}

impl ManifestBuilder {
    pub fn start(command: &str) -> Self {
        let started_at_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        ManifestBuilder {
            manifest: RunManifest {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: None,
                config: serde_json::Value::Null,
                inputs: BTreeMap::new(),
                outputs: Vec::new(),
                notes: Vec::new(),
                started_at_unix,
                duration_secs: 0.0,
            },
            started: Instant::now(),
        }
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.manifest.seed = Some(seed);
        self
    }

    pub fn config<T: Serialize>(&mut self, config: &T) -> Result<&mut Self> {
        self.manifest.config = serde_json::to_value(config)?;
        Ok(self)
    }

    pub fn input(&mut self, name: &str, path: &Path) -> &mut Self {
        self.manifest
            .inputs
            .insert(name.to_string(), path.display().to_string());
        self
    }

    pub fn output(&mut self, name: &str) -> &mut Self {
        self.manifest.outputs.push(name.to_string());
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.manifest.notes.push(note.into());
        self
    }

    pub fn finish(mut self, out_dir: &Path) -> Result<RunManifest> {
        self.manifest.duration_secs = self.started.elapsed().as_secs_f64();
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        std::fs::write(out_dir.join(MANIFEST_FILE), text)?;
        Ok(self.manifest)
    }
}
