use std::collections::HashMap;

use super::predictions::RankedPrediction;
use crate::encoders::MaskedLm;
use crate::error::{ProbeError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MaskAverageOutcome {
    pub prediction: RankedPrediction,
    /// Candidates containing a token outside the MLM vocabulary. They are
    /// scored `-inf`.
    pub out_of_vocab: Vec<String>,
}

/// Ranks candidates by the mean log-probability of their tokens.
///
/// For a candidate of `m` tokens the placeholder is expanded to `m` masks
/// and the `i`-th row is read at the candidate's `i`-th token. All
/// candidates of the same length share one forward pass.
pub fn mask_average_rank(
    mlm: &dyn MaskedLm,
    query_id: &str,
    query: &str,
    mask_placeholder: &str,
    candidates: &[String],
    k: usize,
) -> Result<MaskAverageOutcome> {
    if candidates.is_empty() {
        return Err(ProbeError::Precondition(
            "mask-average needs at least one candidate".into(),
        ));
    }
    let mask = mlm.mask_token().to_string();
    let placeholders = query.matches(mask_placeholder).count();
    if placeholders != 1 {
        return Err(ProbeError::Precondition(format!(
            "query {query:?} must contain exactly one {mask_placeholder}, found {placeholders}"
        )));
    }
    let mut rows_by_len: HashMap<usize, Vec<Vec<f64>>> = HashMap::new();
    let mut out_of_vocab = Vec::new();
    let mut scored = Vec::with_capacity(candidates.len());
    for cand in candidates {
        let tokens = mlm.tokenize(cand);
        let ids: Option<Vec<usize>> = tokens.iter().map(|t| mlm.token_id(t)).collect();
        let score = match ids {
            Some(ids) if !ids.is_empty() => {
                let m = ids.len();
                let rows = rows_by_len.entry(m).or_insert_with(|| {
                    let expanded = query.replace(mask_placeholder, &vec![mask.as_str(); m].join(" "));
                    mlm.score_masks(&mlm.tokenize(&expanded))
                });
                ids.iter().enumerate().map(|(i, &id)| rows[i][id]).sum::<f64>() / m as f64
            }
            _ => {
                out_of_vocab.push(cand.clone());
                f64::NEG_INFINITY
            }
        };
        scored.push((cand.clone(), score));
    }
    Ok(MaskAverageOutcome {
        prediction: RankedPrediction::from_scored(query_id, "mask-average", scored, k),
        out_of_vocab,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::encoders::{MaskRule, TableMlm};

    fn stub() -> TableMlm {
        let vocab: Vec<String> = ["fever", "cough", "rash", "b"].iter().map(|s| s.to_string()).collect();
        let rule = |p: usize, w: &[(&str, f64)]| MaskRule {
            position: Some(p),
            left: None,
            weights: w.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>(),
        };
        TableMlm::new(
            "s",
            vocab,
            "[MASK]",
            0.0,
            vec![
                rule(2, &[("fever", 0.5), ("cough", 0.3), ("rash", 0.2)]),
                rule(3, &[("b", 1.0)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_token_candidates_rank_by_probability() {
        let c: Vec<String> = ["rash", "fever", "cough"].iter().map(|s| s.to_string()).collect();
        let out = mask_average_rank(&stub(), "q", "x prevents [MASK] .", "[MASK]", &c, 10).unwrap();
        let names: Vec<&str> = out.prediction.top(3).collect();
        assert_eq!(names, vec!["fever", "cough", "rash"]);
        assert!((out.prediction.candidates[0].1 - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn oov_scored_neg_infinity_and_reported() {
        let c: Vec<String> = ["zebra", "fever"].iter().map(|s| s.to_string()).collect();
        let out = mask_average_rank(&stub(), "q", "x prevents [MASK] .", "[MASK]", &c, 10).unwrap();
        assert_eq!(out.out_of_vocab, vec!["zebra"]);
        assert_eq!(out.prediction.candidates[1], ("zebra".to_string(), f64::NEG_INFINITY));
    }

    #[test]
    fn certain_tokens_score_zero() {
        let mlm = TableMlm::new(
            "s",
            vec!["a".into(), "b".into()],
            "[MASK]",
            0.0,
            vec![MaskRule {
                position: None,
                left: None,
                weights: BTreeMap::from([("a".to_string(), 1.0)]),
            }],
        )
        .unwrap();
        let c: Vec<String> = vec!["b".into(), "a a".into()];
        let out = mask_average_rank(&mlm, "q", "x [MASK]", "[MASK]", &c, 10).unwrap();
        assert_eq!(out.prediction.candidates[0], ("a a".to_string(), 0.0));
    }
}
