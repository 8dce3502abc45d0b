//! Checkpoint directory layout: `weights.bin` (little-endian f64) plus the
//! `encoder.json` sidecar.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::reference::ReferenceConfig;
use crate::error::{ProbeError, Result};

pub const SIDECAR_FILE: &str = "encoder.json";
pub const WEIGHTS_FILE: &str = "weights.bin";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSidecar {
    pub identity: String,
    pub embedding_dim: usize,
    pub max_layers: usize,
    pub step: usize,
    pub kind: String,
    pub model_id: String,
    pub optimizer: String,
    /// Where the summary vector is read from, recorded per backend.
    pub summary_vector: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceConfig>,
}

impl CheckpointSidecar {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(SIDECAR_FILE);
        let json = std::fs::read_to_string(&path).map_err(|e| ProbeError::input(&path, e))?;
        Ok(serde_json::from_str(&json)?)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        std::fs::write(dir.join(SIDECAR_FILE), json)?;
        Ok(())
    }
}

pub fn is_checkpoint_dir(dir: &Path) -> bool {
    dir.join(SIDECAR_FILE).is_file() && dir.join(WEIGHTS_FILE).is_file()
}

pub(crate) fn write_weights(dir: &Path, weights: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(weights.len() * 8);
    for w in weights {
        bytes.extend_from_slice(&w.to_le_bytes());
    }
    std::fs::write(dir.join(WEIGHTS_FILE), bytes)?;
    Ok(())
}

pub(crate) fn read_weights(dir: &Path, expected: usize) -> Result<Vec<f64>> {
    let path = dir.join(WEIGHTS_FILE);
    let bytes = std::fs::read(&path).map_err(|e| ProbeError::input(&path, e))?;
    if bytes.len() != expected * 8 {
        return Err(ProbeError::Validation(format!(
            "{} holds {} bytes, expected {}",
            path.display(),
            bytes.len(),
            expected * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}
