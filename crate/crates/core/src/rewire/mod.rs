//! Self-supervised contrastive rewiring: raw sentences → tail-masked
//! query/answer pairs → in-batch InfoNCE tuning of the encoder.

pub mod config;
pub mod infonce;
pub mod masking;
pub mod sampling;
pub mod train;

pub use config::RewireConfig;
pub use infonce::{infonce_loss, infonce_with_grad, InfoNceOutput};
pub use masking::{tail_mask, MaskedPair};
pub use sampling::{sample_sentences, word_count};
pub use train::{
    batch_indices, checkpoint_dir, read_loss_trace, rewire_train, write_loss_trace, LossRecord, RewireOutcome,
    CHECKPOINTS_DIR, LOSS_TRACE_FILE, REWIRE_CONFIG_FILE,
};

/// Tail-masks every sentence, dropping the ones too short to split.
pub fn build_pairs(sentences: &[String], mask_ratio: f64, mask_placeholder: &str) -> Vec<MaskedPair> {
    sentences
        .iter()
        .filter_map(|s| tail_mask(s, mask_ratio, mask_placeholder))
        .collect()
}
