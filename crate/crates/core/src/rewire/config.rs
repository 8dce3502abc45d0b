use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ProbeError, Result};

/// Contrastive rewiring hyperparameters. Every field has a default, so a
/// config file may set any subset of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewireConfig {
    pub num_sentences: usize,
    pub mask_ratio: f64,
    pub temperature: f64,
    pub learning_rate: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub checkpoint_every: usize,
    pub probe_checkpoint_step: usize,
    pub seed: u64,
    pub max_query_tokens: usize,
    pub max_answer_tokens: usize,
    pub min_words: usize,
    pub max_words: usize,
}

impl Default for RewireConfig {
    fn default() -> Self {
        RewireConfig {
            num_sentences: 10_000,
            mask_ratio: 0.5,
            temperature: 0.03,
            learning_rate: 2e-5,
            steps: 500,
            batch_size: 96,
            checkpoint_every: 50,
            probe_checkpoint_step: 150,
            seed: 0,
            max_query_tokens: 50,
            max_answer_tokens: 25,
            min_words: 5,
            max_words: 64,
        }
    }
}

impl RewireConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(ProbeError::Config(m));
        if !(self.mask_ratio > 0.0 && self.mask_ratio < 1.0) {
            return fail(format!("mask_ratio must lie in (0,1), got {}", self.mask_ratio));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return fail(format!("temperature must be positive, got {}", self.temperature));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.batch_size == 0 || self.checkpoint_every == 0 {
            return fail("batch_size and checkpoint_every must be at least 1".into());
        }
        // steps = 0 is a valid no-op run.
        if self.steps != 0 && self.steps < self.checkpoint_every {
            return fail(format!(
                "steps ({}) must be >= checkpoint_every ({})",
                self.steps, self.checkpoint_every
            ));
        }
        if self.min_words > self.max_words {
            return fail("min_words must not exceed max_words".into());
        }
        if self.max_query_tokens == 0 || self.max_answer_tokens == 0 {
            return fail("token limits must be at least 1".into());
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path).map_err(|e| ProbeError::input(path, e))?;
        let config: RewireConfig = serde_json::from_str(&json)?;
        Ok(config)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
