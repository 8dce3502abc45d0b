//! Deterministic, trainable reference encoder.
//!
//! A text is turned into hashed character-trigram counts (L2-normalized),
//! projected to `dim` dimensions by a trainable linear map (layer 1), then
//! refined by `layers - 1` residual blocks `h ← h + tanh(W h)`. The summary
//! vector is the output of the last requested block.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{s, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::checkpoint::{read_weights, write_weights, CheckpointSidecar};
use super::{Encoder, Matrix, TrainableEncoder};
use crate::error::{ProbeError, Result};
use crate::text::fnv1a64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    pub dim: usize,
    pub seed: u64,
    pub layers: usize,
    pub buckets: usize,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            dim: 128,
            seed: 0,
            layers: 4,
            buckets: 4096,
        }
    }
}

impl ReferenceConfig {
    pub fn model_id(&self) -> String {
        format!(
            "reference:dim={},seed={},layers={},buckets={}",
            self.dim, self.seed, self.layers, self.buckets
        )
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 8 {
            return Err(ProbeError::Config(format!(
                "reference encoder dim must be >= 8, got {}",
                self.dim
            )));
        }
        if self.layers == 0 || self.layers > 64 {
            return Err(ProbeError::Config(format!(
                "reference encoder layers must be in 1..=64, got {}",
                self.layers
            )));
        }
        if self.buckets == 0 {
            return Err(ProbeError::Config("reference encoder needs at least one bucket".into()));
        }
        Ok(())
    }
}

pub struct ReferenceEncoder {
    config: ReferenceConfig,
    /// `buckets × dim`; row b is the embedding of trigram bucket b.
    projection: Array2<f64>,
    /// Residual block weights, `dim × dim` each.
    blocks: Vec<Array2<f64>>,
    step: usize,
    accessed: AtomicU64,
}

impl std::fmt::Debug for ReferenceEncoder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReferenceEncoder")
            .field("config", &self.config)
            .field("step", &self.step)
            .finish_non_exhaustive()
    }
}

type SparseFeatures = Vec<(usize, f64)>;

struct ForwardCache {
    features: Vec<SparseFeatures>,
    /// Hidden states entering each block; `inputs[0]` is the projection output.
    inputs: Vec<Matrix>,
    /// `tanh(W h)` for each block.
    activations: Vec<Matrix>,
}

impl ReferenceEncoder {
    pub fn new(config: ReferenceConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let proj_std = 1.0 / (config.dim as f64).sqrt();
        let proj = Normal::new(0.0, proj_std).expect("finite std");
        let projection = Array2::from_shape_fn((config.buckets, config.dim), |_| proj.sample(&mut rng));
        let block = Normal::new(0.0, 0.5 / (config.dim as f64).sqrt()).expect("finite std");
        let blocks = (1..config.layers)
            .map(|_| Array2::from_shape_fn((config.dim, config.dim), |_| block.sample(&mut rng)))
            .collect();
        Ok(ReferenceEncoder {
            config,
            projection,
            blocks,
            step: 0,
            accessed: AtomicU64::new(0),
        })
    }

    /// Shorthand for `ReferenceConfig { dim, seed, ..Default::default() }`.
    pub fn with_dim_seed(dim: usize, seed: u64) -> Result<Self> {
        Self::new(ReferenceConfig {
            dim,
            seed,
            ..Default::default()
        })
    }

    pub fn config(&self) -> &ReferenceConfig {
        &self.config
    }

    /// Layers (1-based) whose parameters have been read since the last
    /// [`ReferenceEncoder::clear_access_log`].
    pub fn accessed_layers(&self) -> Vec<usize> {
        let bits = self.accessed.load(Ordering::Relaxed);
        (0..64).filter(|i| bits & (1 << i) != 0).map(|i| i + 1).collect()
    }

    pub fn clear_access_log(&self) {
        self.accessed.store(0, Ordering::Relaxed);
    }

    fn touch(&self, layer: usize) {
        self.accessed.fetch_or(1 << (layer - 1), Ordering::Relaxed);
    }

    fn features(&self, text: &str) -> SparseFeatures {
        let padded: Vec<char> = std::iter::once(' ')
            .chain(text.to_lowercase().chars())
            .chain(std::iter::once(' '))
            .collect();
        let mut counts: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
        let mut buf = [0u8; 12];
        for w in padded.windows(3) {
            let mut len = 0;
            for c in w {
                len += c.encode_utf8(&mut buf[len..]).len();
            }
            let bucket = (fnv1a64(&buf[..len]) % self.config.buckets as u64) as usize;
            *counts.entry(bucket).or_insert(0.0) += 1.0;
        }
        let norm = counts.values().map(|c| c * c).sum::<f64>().sqrt();
        counts.into_iter().map(|(b, c)| (b, c / norm)).collect()
    }

    fn run(&self, texts: &[&str], layer_limit: usize, keep_cache: bool) -> (Matrix, Option<ForwardCache>) {
        let features: Vec<SparseFeatures> = texts.iter().map(|t| self.features(t)).collect();
        self.touch(1);
        let mut h = Array2::<f64>::zeros((texts.len(), self.config.dim));
        for (mut row, feats) in h.axis_iter_mut(Axis(0)).zip(&features) {
            for &(bucket, w) in feats {
                row.scaled_add(w, &self.projection.row(bucket));
            }
        }
        let mut inputs = Vec::new();
        let mut activations = Vec::new();
        for (i, w) in self.blocks.iter().enumerate().take(layer_limit - 1) {
            self.touch(i + 2);
            let act = h.dot(&w.t()).mapv(f64::tanh);
            let next = &h + &act;
            if keep_cache {
                inputs.push(h);
                activations.push(act);
            }
            h = next;
        }
        let cache = keep_cache.then(|| ForwardCache {
            features,
            inputs,
            activations,
        });
        (h, cache)
    }

    fn flat_len(&self) -> usize {
        self.config.buckets * self.config.dim + self.blocks.len() * self.config.dim * self.config.dim
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flat_len());
        out.extend(self.projection.iter());
        for b in &self.blocks {
            out.extend(b.iter());
        }
        out
    }

    fn sidecar(&self) -> CheckpointSidecar {
        CheckpointSidecar {
            identity: self.identity(),
            embedding_dim: self.config.dim,
            max_layers: self.config.layers,
            step: self.step,
            kind: "reference".into(),
            model_id: self.config.model_id(),
            optimizer: "sgd".into(),
            summary_vector: "output of the last requested residual block; no final normalization".into(),
            reference: Some(self.config),
        }
    }

    /// Restores weights and step from a checkpoint directory.
    pub fn load_checkpoint(dir: &Path) -> Result<Self> {
        let sidecar = CheckpointSidecar::read(dir)?;
        let config = sidecar.reference.ok_or_else(|| {
            ProbeError::Config(format!(
                "checkpoint {} is a {:?} checkpoint, not a reference encoder",
                dir.display(),
                sidecar.kind
            ))
        })?;
        let mut enc = ReferenceEncoder::new(config)?;
        let weights = read_weights(dir, enc.flat_len())?;
        let (proj, rest) = weights.split_at(config.buckets * config.dim);
        enc.projection = Array2::from_shape_vec((config.buckets, config.dim), proj.to_vec())
            .map_err(|e| ProbeError::Validation(e.to_string()))?;
        for (i, block) in enc.blocks.iter_mut().enumerate() {
            let n = config.dim * config.dim;
            *block = Array2::from_shape_vec((config.dim, config.dim), rest[i * n..(i + 1) * n].to_vec())
                .map_err(|e| ProbeError::Validation(e.to_string()))?;
        }
        enc.step = sidecar.step;
        Ok(enc)
    }
}

impl Clone for ReferenceEncoder {
    fn clone(&self) -> Self {
        ReferenceEncoder {
            config: self.config,
            projection: self.projection.clone(),
            blocks: self.blocks.clone(),
            step: self.step,
            accessed: AtomicU64::new(0),
        }
    }
}

impl Encoder for ReferenceEncoder {
    fn identity(&self) -> String {
        format!("{}@{}", self.config.model_id(), self.step)
    }

    fn embedding_dim(&self) -> usize {
        self.config.dim
    }

    fn max_layers(&self) -> usize {
        self.config.layers
    }

    fn forward(&self, texts: &[&str], layer_limit: usize) -> Matrix {
        self.run(texts, layer_limit, false).0
    }
}

impl TrainableEncoder for ReferenceEncoder {
    fn sgd_step(&mut self, texts: &[&str], output_grads: &Matrix, learning_rate: f64) -> Result<()> {
        if output_grads.dim() != (texts.len(), self.config.dim) {
            return Err(ProbeError::Precondition(format!(
                "gradient shape {:?} does not match {} texts × {} dims",
                output_grads.dim(),
                texts.len(),
                self.config.dim
            )));
        }
        let (_, cache) = self.run(texts, self.config.layers, true);
        let cache = cache.expect("cache requested");
        let mut grad = output_grads.clone();
        let mut block_grads = Vec::with_capacity(self.blocks.len());
        for l in (0..self.blocks.len()).rev() {
            let act = &cache.activations[l];
            let pre = &grad * &act.mapv(|a| 1.0 - a * a);
            block_grads.push((l, pre.t().dot(&cache.inputs[l])));
            grad = &grad + &pre.dot(&self.blocks[l]);
        }
        for (l, g) in block_grads {
            self.blocks[l].scaled_add(-learning_rate, &g);
        }
        for (row, feats) in grad.axis_iter(Axis(0)).zip(&cache.features) {
            for &(bucket, w) in feats {
                self.projection
                    .slice_mut(s![bucket, ..])
                    .scaled_add(-learning_rate * w, &row);
            }
        }
        self.step += 1;
        Ok(())
    }

    fn step(&self) -> usize {
        self.step
    }

    fn save_checkpoint(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_weights(dir, &self.flatten())?;
        self.sidecar().write(dir)
    }

    fn as_encoder(&self) -> &dyn Encoder {
        self
    }
}
