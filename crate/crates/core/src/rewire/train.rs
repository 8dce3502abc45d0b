use std::path::{Path, PathBuf};

use ndarray::{concatenate, s, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::RewireConfig;
use super::infonce::infonce_with_grad;
use super::masking::MaskedPair;
use crate::encoders::TrainableEncoder;
use crate::error::{ProbeError, Result};
use crate::text::{fnv1a64, truncate_tokens};

pub const LOSS_TRACE_FILE: &str = "loss_trace.csv";
pub const REWIRE_CONFIG_FILE: &str = "rewire_config.json";
pub const CHECKPOINTS_DIR: &str = "checkpoints";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub step: usize,
    pub loss_sum: f64,
    pub loss_mean: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RewireOutcome {
    pub trace: Vec<LossRecord>,
    pub checkpoints: Vec<(usize, PathBuf)>,
}

pub fn checkpoint_dir(out_dir: &Path, step: usize) -> PathBuf {
    out_dir.join(CHECKPOINTS_DIR).join(format!("step_{step:06}"))
}

/// Pair indices of the batch used for 0-based update `update`.
///
/// Each epoch is an independent seeded shuffle (one ChaCha stream per
/// epoch), so a run resumed from a checkpoint sees the same batches as an
/// uninterrupted one. The final short batch of an epoch is dropped.
pub fn batch_indices(update: usize, num_pairs: usize, batch_size: usize, seed: u64) -> Vec<usize> {
    let per_epoch = num_pairs / batch_size;
    let epoch = update / per_epoch;
    let slot = update % per_epoch;
    let mut order: Vec<usize> = (0..num_pairs).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64);
    order.shuffle(&mut rng);
    order[slot * batch_size..(slot + 1) * batch_size].to_vec()
}

/// Runs contrastive rewiring from the encoder's current step up to
/// `config.steps` updates.
///
/// With `out_dir`, a checkpoint (encoder layout plus `rewire_config.json`)
/// is written every `checkpoint_every` steps and at the final step.
pub fn rewire_train(
    encoder: &mut dyn TrainableEncoder,
    pairs: &[MaskedPair],
    config: &RewireConfig,
    out_dir: Option<&Path>,
) -> Result<RewireOutcome> {
    config.validate()?;
    let mut outcome = RewireOutcome::default();
    if config.steps == 0 || encoder.step() >= config.steps {
        return Ok(outcome);
    }
    if pairs.len() < config.batch_size {
        return Err(ProbeError::Precondition(format!(
            "{} training pairs is fewer than batch_size {}",
            pairs.len(),
            config.batch_size
        )));
    }
    let queries: Vec<String> = pairs
        .iter()
        .map(|p| truncate_tokens(&p.query, config.max_query_tokens))
        .collect();
    let answers: Vec<String> = pairs
        .iter()
        .map(|p| truncate_tokens(&p.answer, config.max_answer_tokens))
        .collect();
    let layers = encoder.max_layers();

    for update in encoder.step()..config.steps {
        let idx = batch_indices(update, pairs.len(), config.batch_size, config.seed);
        let mut texts: Vec<&str> = idx.iter().map(|&i| queries[i].as_str()).collect();
        texts.extend(idx.iter().map(|&i| answers[i].as_str()));
        let n = idx.len();

        let encoded = encoder.encode(&texts, layers)?;
        let q = encoded.slice(s![..n, ..]).to_owned();
        let a = encoded.slice(s![n.., ..]).to_owned();
        let step = update + 1;
        let out = infonce_with_grad(&q, &a, config.temperature).map_err(|e| match e {
            ProbeError::NumericalDomain(_) => ProbeError::NonFiniteLoss {
                step,
                fingerprint: batch_fingerprint(&texts),
            },
            other => other,
        })?;
        if !out.loss.is_finite() {
            return Err(ProbeError::NonFiniteLoss {
                step,
                fingerprint: batch_fingerprint(&texts),
            });
        }
        let grads = concatenate(Axis(0), &[out.query_grads.view(), out.answer_grads.view()]).expect("equal widths");
        encoder.sgd_step(&texts, &grads, config.learning_rate)?;
        outcome.trace.push(LossRecord {
            step,
            loss_sum: out.loss,
            loss_mean: out.loss / n as f64,
        });

        if let Some(dir) = out_dir {
            if step % config.checkpoint_every == 0 || step == config.steps {
                let ckpt = checkpoint_dir(dir, step);
                encoder.save_checkpoint(&ckpt)?;
                std::fs::write(ckpt.join(REWIRE_CONFIG_FILE), config.to_json_pretty()?)?;
                outcome.checkpoints.push((step, ckpt));
            }
        }
    }
    Ok(outcome)
}

fn batch_fingerprint(texts: &[&str]) -> String {
    format!("{:016x}", fnv1a64(texts.join("\n").as_bytes()))
}

pub fn write_loss_trace(path: &Path, trace: &[LossRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in trace {
        w.serialize(r)?;
    }
    if trace.is_empty() {
        w.write_record(["step", "loss_sum", "loss_mean"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_loss_trace(path: &Path) -> Result<Vec<LossRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batches_cover_an_epoch_without_repeats() {
        let mut seen: Vec<usize> = (0..3).flat_map(|u| batch_indices(u, 10, 3, 4)).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 9);
        // Next epoch reshuffles.
        assert_ne!(batch_indices(0, 10, 3, 4), batch_indices(3, 10, 3, 4));
        assert_eq!(batch_indices(5, 10, 3, 4), batch_indices(5, 10, 3, 4));
    }
}
