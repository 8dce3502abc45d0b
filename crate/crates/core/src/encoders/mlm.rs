//! Masked-token prediction surface and a table-driven stub.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ProbeError, Result};

pub trait MaskedLm: Send + Sync {
    fn identity(&self) -> String;
    /// Ordered vocabulary; row entries of [`MaskedLm::score_masks`] follow it.
    fn vocab(&self) -> &[String];
    fn mask_token(&self) -> &str;
    fn token_id(&self, token: &str) -> Option<usize>;

    fn tokenize(&self, text: &str) -> Vec<String>;

    fn detokenize(&self, tokens: &[String]) -> String {
        tokens.join(" ")
    }

    /// One log-probability row per mask token in `tokens`, left to right.
    /// Filled (non-mask) tokens condition the prediction.
    fn score_masks(&self, tokens: &[String]) -> Vec<Vec<f64>>;

    fn mask_logprobs(&self, query_with_masks: &str) -> Result<Vec<Vec<f64>>> {
        let tokens = self.tokenize(query_with_masks);
        if !tokens.iter().any(|t| t == self.mask_token()) {
            return Err(ProbeError::Precondition(format!(
                "query {query_with_masks:?} contains no {}",
                self.mask_token()
            )));
        }
        Ok(self.score_masks(&tokens))
    }
}

/// One conditional distribution of the stub.
///
/// A rule applies to a mask at absolute token `position` (if set) whose left
/// neighbour is `left` (if set; the left neighbour may itself be the mask
/// token). Among applicable rules the most specific wins (position and left
/// > position > left > neither); ties go to the earliest rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<String>,
    pub weights: BTreeMap<String, f64>,
}

impl MaskRule {
    fn specificity(&self, position: usize, left: Option<&str>) -> Option<u8> {
        let mut score = 0;
        if let Some(p) = self.position {
            if p != position {
                return None;
            }
            score += 2;
        }
        if let Some(l) = &self.left {
            if Some(l.as_str()) != left {
                return None;
            }
            score += 1;
        }
        Some(score)
    }
}

/// Stub MLM driven by [`MaskRule`]s. Tokens outside a rule's weight map get
/// `smoothing` mass before normalization; masks with no applicable rule get a
/// uniform row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableMlm {
    pub identity: String,
    pub vocab: Vec<String>,
    pub mask_token: String,
    #[serde(default)]
    pub smoothing: f64,
    pub rules: Vec<MaskRule>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl TableMlm {
    pub fn new(
        identity: impl Into<String>,
        vocab: Vec<String>,
        mask_token: impl Into<String>,
        smoothing: f64,
        rules: Vec<MaskRule>,
    ) -> Result<Self> {
        let mut mlm = TableMlm {
            identity: identity.into(),
            vocab,
            mask_token: mask_token.into(),
            smoothing,
            rules,
            index: HashMap::new(),
        };
        mlm.prepare()?;
        Ok(mlm)
    }

    fn prepare(&mut self) -> Result<()> {
        if self.vocab.is_empty() {
            return Err(ProbeError::Config("stub MLM vocabulary is empty".into()));
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(ProbeError::Config(
                "smoothing must be a finite non-negative number".into(),
            ));
        }
        for v in &mut self.vocab {
            *v = v.to_lowercase();
        }
        self.index.clear();
        for (i, v) in self.vocab.iter().enumerate() {
            if self.index.insert(v.clone(), i).is_some() {
                return Err(ProbeError::Config(format!("duplicate vocabulary token {v:?}")));
            }
        }
        let mask = self.mask_token.clone();
        let lower = |t: &str| if t == mask { t.to_string() } else { t.to_lowercase() };
        for (i, rule) in self.rules.iter_mut().enumerate() {
            rule.left = rule.left.as_deref().map(lower);
            rule.weights = std::mem::take(&mut rule.weights)
                .into_iter()
                .map(|(k, w)| (k.to_lowercase(), w))
                .collect();
            for (tok, w) in &rule.weights {
                if !self.index.contains_key(tok) {
                    return Err(ProbeError::Config(format!("rule {i} weights unknown token {tok:?}")));
                }
                if !(*w >= 0.0 && w.is_finite()) {
                    return Err(ProbeError::Config(format!(
                        "rule {i} has invalid weight {w} for {tok:?}"
                    )));
                }
            }
            let covered = rule.weights.len() < self.vocab.len() && self.smoothing > 0.0;
            if rule.weights.values().sum::<f64>() <= 0.0 && !covered {
                return Err(ProbeError::Config(format!("rule {i} assigns no probability mass")));
            }
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let mut mlm: TableMlm = serde_json::from_str(json)?;
        mlm.prepare()?;
        Ok(mlm)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path).map_err(|e| ProbeError::input(path, e))?;
        Self::from_json(&json)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn row(&self, position: usize, left: Option<&str>) -> Vec<f64> {
        let rule = self
            .rules
            .iter()
            .filter_map(|r| r.specificity(position, left).map(|s| (s, r)))
            .fold(None::<(u8, &MaskRule)>, |best, (s, r)| match best {
                Some((bs, _)) if bs >= s => best,
                _ => Some((s, r)),
            })
            .map(|(_, r)| r);
        let weights: Vec<f64> = match rule {
            Some(r) => self
                .vocab
                .iter()
                .map(|t| r.weights.get(t).copied().unwrap_or(self.smoothing))
                .collect(),
            None => vec![1.0; self.vocab.len()],
        };
        let total: f64 = weights.iter().sum();
        weights.iter().map(|w| (w / total).ln()).collect()
    }
}

impl MaskedLm for TableMlm {
    fn identity(&self) -> String {
        self.identity.clone()
    }

    fn vocab(&self) -> &[String] {
        &self.vocab
    }

    fn mask_token(&self) -> &str {
        &self.mask_token
    }

    fn token_id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    fn tokenize(&self, text: &str) -> Vec<String> {
        text.split_whitespace()
            .map(|t| {
                if t == self.mask_token {
                    t.to_string()
                } else {
                    t.to_lowercase()
                }
            })
            .collect()
    }

    fn score_masks(&self, tokens: &[String]) -> Vec<Vec<f64>> {
        tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| *t == &self.mask_token)
            .map(|(p, _)| {
                let left = p.checked_sub(1).map(|l| tokens[l].as_str());
                self.row(p, left)
            })
            .collect()
    }
}
