//! Generation surface: a cloze query in, ranked free-text answers out.

use std::sync::Arc;

use super::mlm::MaskedLm;
use crate::error::{ProbeError, Result};

pub trait Generator: Send + Sync {
    fn identity(&self) -> String;
    fn max_new_tokens(&self) -> usize;
    /// Candidates ranked by model score, best first.
    fn generate(&self, query: &str, max_candidates: usize) -> Result<Vec<(String, f64)>>;
}

/// Returns a fixed list regardless of the query.
#[derive(Debug, Clone)]
pub struct FixedGenerator {
    pub outputs: Vec<(String, f64)>,
}

impl FixedGenerator {
    pub fn new<S: Into<String>>(outputs: impl IntoIterator<Item = (S, f64)>) -> Self {
        FixedGenerator {
            outputs: outputs.into_iter().map(|(s, v)| (s.into(), v)).collect(),
        }
    }
}

impl Generator for FixedGenerator {
    fn identity(&self) -> String {
        "fixed".into()
    }

    fn max_new_tokens(&self) -> usize {
        usize::MAX
    }

    fn generate(&self, _query: &str, max_candidates: usize) -> Result<Vec<(String, f64)>> {
        Ok(self.outputs.iter().take(max_candidates).cloned().collect())
    }
}

/// Left-to-right beam search that uses a [`MaskedLm`] as the next-token
/// model: at each step a single mask is placed after the tokens generated so
/// far and its row is read as the next-token distribution.
///
/// Hypotheses finish when `stop_token` is chosen or after `max_new_tokens`
/// tokens. Scores are mean token log-probabilities.
pub struct BeamGenerator {
    mlm: Arc<dyn MaskedLm>,
    pub beam_width: usize,
    pub max_new_tokens: usize,
    pub stop_token: String,
}

impl BeamGenerator {
    pub fn new(mlm: Arc<dyn MaskedLm>, beam_width: usize, max_new_tokens: usize) -> Self {
        BeamGenerator {
            mlm,
            beam_width: beam_width.max(1),
            max_new_tokens: max_new_tokens.max(1),
            stop_token: ".".into(),
        }
    }
}

#[derive(Clone)]
struct Hypothesis {
    tokens: Vec<String>,
    logprob: f64,
}

impl Hypothesis {
    fn score(&self) -> f64 {
        self.logprob / self.tokens.len().max(1) as f64
    }
}

impl Generator for BeamGenerator {
    fn identity(&self) -> String {
        format!("beam{}:{}", self.beam_width, self.mlm.identity())
    }

    fn max_new_tokens(&self) -> usize {
        self.max_new_tokens
    }

    fn generate(&self, query: &str, max_candidates: usize) -> Result<Vec<(String, f64)>> {
        let mask = self.mlm.mask_token().to_string();
        let tokens = self.mlm.tokenize(query);
        let at = tokens
            .iter()
            .position(|t| *t == mask)
            .ok_or_else(|| ProbeError::Precondition(format!("query {query:?} has no {mask}")))?;
        let (prefix, suffix) = (&tokens[..at], &tokens[at + 1..]);

        let mut live = vec![Hypothesis {
            tokens: Vec::new(),
            logprob: 0.0,
        }];
        let mut done: Vec<Hypothesis> = Vec::new();
        for _ in 0..self.max_new_tokens {
            let mut expanded: Vec<Hypothesis> = Vec::new();
            for hyp in &live {
                let mut ctx = prefix.to_vec();
                ctx.extend(hyp.tokens.iter().cloned());
                ctx.push(mask.clone());
                ctx.extend(suffix.iter().cloned());
                let row = &self.mlm.score_masks(&ctx)[0];
                let mut order: Vec<usize> = (0..row.len()).filter(|&i| self.mlm.vocab()[i] != mask).collect();
                order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
                for &i in order.iter().take(self.beam_width) {
                    if row[i] == f64::NEG_INFINITY {
                        continue;
                    }
                    let tok = &self.mlm.vocab()[i];
                    let logprob = hyp.logprob + row[i];
                    if *tok == self.stop_token {
                        if !hyp.tokens.is_empty() {
                            done.push(Hypothesis {
                                tokens: hyp.tokens.clone(),
                                logprob,
                            });
                        }
                    } else {
                        let mut t = hyp.tokens.clone();
                        t.push(tok.clone());
                        expanded.push(Hypothesis { tokens: t, logprob });
                    }
                }
            }
            expanded.sort_by(|a, b| b.logprob.total_cmp(&a.logprob));
            expanded.truncate(self.beam_width);
            live = expanded;
            if live.is_empty() {
                break;
            }
        }
        done.extend(live);
        done.sort_by(|a, b| b.score().total_cmp(&a.score()));
        Ok(done
            .into_iter()
            .take(max_candidates)
            .map(|h| (self.mlm.detokenize(&h.tokens), h.score()))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::encoders::mlm::{MaskRule, TableMlm};

    fn rule(left: &str, w: &[(&str, f64)]) -> MaskRule {
        MaskRule {
            position: None,
            left: Some(left.into()),
            weights: w.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>(),
        }
    }

    #[test]
    fn beam_search_follows_bigram_chain() {
        let mlm = TableMlm::new(
            "bigram",
            ["hepatitis", "b", "c", "fever", "."]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            "[MASK]",
            0.0,
            vec![
                rule("prevent", &[("hepatitis", 0.7), ("fever", 0.3)]),
                rule("hepatitis", &[("b", 0.6), ("c", 0.4)]),
                rule("b", &[(".", 1.0)]),
                rule("c", &[(".", 1.0)]),
                rule("fever", &[(".", 1.0)]),
            ],
        )
        .unwrap();
        let g = BeamGenerator::new(Arc::new(mlm), 5, 4);
        let out = g.generate("Entecavir may prevent [MASK] .", 10).unwrap();
        let names: Vec<&str> = out.iter().map(|(s, _)| s.as_str()).collect();
        assert_eq!(names[0], "hepatitis b");
        assert!(names.contains(&"hepatitis c"));
        assert!(names.contains(&"fever"));
        assert!(out.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn fixed_generator_truncates() {
        let g = FixedGenerator::new([("a", 1.0), ("b", 0.5), ("c", 0.1)]);
        assert_eq!(g.generate("q [MASK]", 2).unwrap().len(), 2);
    }
}
