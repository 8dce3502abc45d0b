//! Model surfaces used by the probers.
//!
//! * [`Encoder`] / [`TrainableEncoder`]: text → one summary vector, with
//!   layer truncation. [`ReferenceEncoder`] is the bundled, dependency-free
//!   implementation.
//! * [`MaskedLm`]: per-mask-position log-probabilities over a vocabulary.
//! * [`Generator`]: ranked free-text completions for a cloze query.
//!
//! Real pre-trained backends plug in as adapters behind these traits; the
//! rest of the toolkit never depends on a concrete model.

pub mod checkpoint;
pub mod generator;
pub mod mlm;
pub mod reference;
pub mod spec;

use std::path::Path;

use ndarray::Array2;

use crate::error::{ProbeError, Result};

pub use checkpoint::CheckpointSidecar;
pub use generator::{BeamGenerator, FixedGenerator, Generator};
pub use mlm::{MaskRule, MaskedLm, TableMlm};
pub use reference::{ReferenceConfig, ReferenceEncoder};
pub use spec::{load_encoder, EncoderSpec};

/// Row-major batch of vectors, one row per input text.
pub type Matrix = Array2<f64>;

pub trait Encoder: Send + Sync {
    /// Model id plus checkpoint step, e.g. `reference:dim=128,seed=7,layers=4@150`.
    fn identity(&self) -> String;
    fn embedding_dim(&self) -> usize;
    fn max_layers(&self) -> usize;

    /// Summary vectors using only the first `layer_limit` layers. Called
    /// after [`Encoder::encode`] has validated its arguments.
    fn forward(&self, texts: &[&str], layer_limit: usize) -> Matrix;

    fn encode(&self, texts: &[&str], layer_limit: usize) -> Result<Matrix> {
        check_layer_limit(layer_limit, self.max_layers())?;
        if let Some(i) = texts.iter().position(|t| t.trim().is_empty()) {
            return Err(ProbeError::Precondition(format!("text #{i} is empty")));
        }
        Ok(self.forward(texts, layer_limit))
    }

    fn encode_full(&self, texts: &[&str]) -> Result<Matrix> {
        self.encode(texts, self.max_layers())
    }
}

pub trait TrainableEncoder: Encoder {
    /// Backpropagates `output_grads` (dL/d output, one row per text, full
    /// depth) and applies one plain SGD update.
    fn sgd_step(&mut self, texts: &[&str], output_grads: &Matrix, learning_rate: f64) -> Result<()>;

    /// Number of optimizer updates applied so far.
    fn step(&self) -> usize;

    fn save_checkpoint(&self, dir: &Path) -> Result<()>;

    fn as_encoder(&self) -> &dyn Encoder;
}

pub fn check_layer_limit(layer_limit: usize, max_layers: usize) -> Result<()> {
    if layer_limit == 0 || layer_limit > max_layers {
        return Err(ProbeError::Config(format!(
            "layer_limit {layer_limit} out of range 1..={max_layers}"
        )));
    }
    Ok(())
}

/// Layer limits for a sweep: the standard grid for a 12-layer encoder,
/// every available depth for shallower ones.
pub fn default_layer_grid(max_layers: usize) -> Vec<usize> {
    const GRID: [usize; 6] = [3, 5, 7, 9, 11, 12];
    if max_layers >= 12 {
        GRID.to_vec()
    } else {
        (1..=max_layers).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_grid() {
        assert_eq!(default_layer_grid(12), vec![3, 5, 7, 9, 11, 12]);
        assert_eq!(default_layer_grid(4), vec![1, 2, 3, 4]);
        assert!(check_layer_limit(0, 4).is_err());
        assert!(check_layer_limit(5, 4).is_err());
        assert!(check_layer_limit(4, 4).is_ok());
    }
}
