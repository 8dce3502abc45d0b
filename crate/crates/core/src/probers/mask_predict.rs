//! Multi-token mask filling with a masked LM.
//!
//! The single placeholder is expanded to `num_masks` mask tokens, which are
//! filled by one of three strategies and optionally refined by re-masking
//! one token at a time.

use std::str::FromStr;

use super::predictions::RankedPrediction;
use crate::encoders::MaskedLm;
use crate::error::{ProbeError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillStrategy {
    /// Argmax of every position from a single pass.
    Independent,
    /// Left to right, re-scoring after each fill.
    Order,
    /// Repeatedly fill the most confident remaining position.
    Confidence,
}

impl FromStr for FillStrategy {
    type Err = ProbeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(FillStrategy::Independent),
            "order" => Ok(FillStrategy::Order),
            "confidence" => Ok(FillStrategy::Confidence),
            other => Err(ProbeError::Config(format!("unknown fill strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskPredictConfig {
    pub num_masks: usize,
    pub strategy: FillStrategy,
    /// Refinement schedule, if any:
    /// * `Order`: left-to-right sweep, each re-prediction applied at once;
    /// * `Independent`: every position re-predicted from the same snapshot,
    ///   then all applied;
    /// * `Confidence`: the single most confident change is applied per
    ///   iteration.
    pub refine: Option<FillStrategy>,
    pub max_refine_iters: usize,
}

impl Default for MaskPredictConfig {
    fn default() -> Self {
        MaskPredictConfig {
            num_masks: 5,
            strategy: FillStrategy::Independent,
            refine: None,
            max_refine_iters: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskPrediction {
    pub answer: String,
    pub tokens: Vec<String>,
    /// Mean log-probability of each filled token with only that position
    /// masked.
    pub score: f64,
    pub refine_iters: usize,
    pub converged: bool,
}

/// Best non-mask token of a row; ties go to the lower vocabulary index.
fn argmax(mlm: &dyn MaskedLm, row: &[f64]) -> (usize, f64) {
    let mask = mlm.mask_token();
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for (i, &v) in row.iter().enumerate() {
        if mlm.vocab()[i] == mask {
            continue;
        }
        if best.0 == usize::MAX || v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Re-predicts `slot` with every other token fixed.
fn repredict(mlm: &dyn MaskedLm, tokens: &[String], slot: usize) -> (String, f64, f64) {
    let mut ctx = tokens.to_vec();
    ctx[slot] = mlm.mask_token().to_string();
    let row = &mlm.score_masks(&ctx)[0];
    let (id, lp) = argmax(mlm, row);
    let current = mlm.token_id(&tokens[slot]).map_or(f64::NEG_INFINITY, |i| row[i]);
    (mlm.vocab()[id].clone(), lp, current)
}

pub fn mask_predict(
    mlm: &dyn MaskedLm,
    query: &str,
    mask_placeholder: &str,
    config: &MaskPredictConfig,
) -> Result<MaskPrediction> {
    if config.num_masks == 0 {
        return Err(ProbeError::Config("num_masks must be at least 1".into()));
    }
    let mask = mlm.mask_token().to_string();
    let native = query.replace(mask_placeholder, &mask);
    let base = mlm.tokenize(&native);
    let at: Vec<usize> = base
        .iter()
        .enumerate()
        .filter(|(_, t)| **t == mask)
        .map(|(i, _)| i)
        .collect();
    if at.len() != 1 {
        return Err(ProbeError::Precondition(format!(
            "query {query:?} must contain exactly one {mask_placeholder}, found {}",
            at.len()
        )));
    }
    let start = at[0];
    let slots: Vec<usize> = (start..start + config.num_masks).collect();
    let mut tokens: Vec<String> = base[..start].to_vec();
    tokens.extend(std::iter::repeat_n(mask.clone(), config.num_masks));
    tokens.extend(base[start + 1..].iter().cloned());

    match config.strategy {
        FillStrategy::Independent => {
            let rows = mlm.score_masks(&tokens);
            for (slot, row) in slots.iter().zip(&rows) {
                tokens[*slot] = mlm.vocab()[argmax(mlm, row).0].clone();
            }
        }
        FillStrategy::Order => {
            for &slot in &slots {
                let rows = mlm.score_masks(&tokens);
                tokens[slot] = mlm.vocab()[argmax(mlm, &rows[0]).0].clone();
            }
        }
        FillStrategy::Confidence => {
            for _ in 0..slots.len() {
                let open: Vec<usize> = slots.iter().copied().filter(|&s| tokens[s] == mask).collect();
                let rows = mlm.score_masks(&tokens);
                let (pos, id) = open
                    .iter()
                    .zip(&rows)
                    .map(|(&s, row)| (s, argmax(mlm, row)))
                    .fold(None::<(usize, (usize, f64))>, |best, cur| match best {
                        Some(b) if b.1 .1 >= cur.1 .1 => Some(b),
                        _ => Some(cur),
                    })
                    .map(|(s, (id, _))| (s, id))
                    .expect("at least one open slot");
                tokens[pos] = mlm.vocab()[id].clone();
            }
        }
    }

    let mut refine_iters = 0;
    let mut converged = config.refine.is_none();
    if let Some(schedule) = config.refine {
        while refine_iters < config.max_refine_iters {
            refine_iters += 1;
            let changed = match schedule {
                FillStrategy::Order => {
                    let mut changed = false;
                    for &slot in &slots {
                        let (tok, _, _) = repredict(mlm, &tokens, slot);
                        if tok != tokens[slot] {
                            tokens[slot] = tok;
                            changed = true;
                        }
                    }
                    changed
                }
                FillStrategy::Independent => {
                    let updates: Vec<(usize, String)> = slots
                        .iter()
                        .map(|&s| (s, repredict(mlm, &tokens, s).0))
                        .filter(|(s, tok)| *tok != tokens[*s])
                        .collect();
                    let changed = !updates.is_empty();
                    for (s, tok) in updates {
                        tokens[s] = tok;
                    }
                    changed
                }
                FillStrategy::Confidence => {
                    let best = slots
                        .iter()
                        .map(|&s| (s, repredict(mlm, &tokens, s)))
                        .filter(|(s, (tok, _, _))| *tok != tokens[*s])
                        .fold(None::<(usize, String, f64)>, |best, (s, (tok, lp, _))| match best {
                            Some(b) if b.2 >= lp => Some(b),
                            _ => Some((s, tok, lp)),
                        });
                    match best {
                        Some((s, tok, _)) => {
                            tokens[s] = tok;
                            true
                        }
                        None => false,
                    }
                }
            };
            if !changed {
                converged = true;
                break;
            }
        }
    }

    let filled: Vec<String> = slots.iter().map(|&s| tokens[s].clone()).collect();
    let score = slots.iter().map(|&s| repredict(mlm, &tokens, s).2).sum::<f64>() / slots.len() as f64;
    Ok(MaskPrediction {
        answer: mlm.detokenize(&filled).trim().to_string(),
        tokens: filled,
        score,
        refine_iters,
        converged,
    })
}

/// Mask-predict probing: decodes with 1..=`num_masks` masks and ranks the
/// answers by score. Filled tokens after the first punctuation-only token
/// are dropped.
pub fn mask_predict_probe(
    mlm: &dyn MaskedLm,
    query_id: &str,
    query: &str,
    mask_placeholder: &str,
    config: &MaskPredictConfig,
    k: usize,
) -> Result<RankedPrediction> {
    let mut scored = Vec::with_capacity(config.num_masks);
    for m in 1..=config.num_masks {
        let cfg = MaskPredictConfig {
            num_masks: m,
            ..config.clone()
        };
        let p = mask_predict(mlm, query, mask_placeholder, &cfg)?;
        let kept: Vec<String> = p
            .tokens
            .iter()
            .take_while(|t| t.chars().any(char::is_alphanumeric))
            .cloned()
            .collect();
        if !kept.is_empty() {
            scored.push((mlm.detokenize(&kept), p.score));
        }
    }
    Ok(RankedPrediction::from_scored(query_id, "mask-predict", scored, k))
}
