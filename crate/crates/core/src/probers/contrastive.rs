use std::collections::HashMap;
use std::str::FromStr;

use ndarray::ArrayView1;

use super::index::EntityIndex;
use super::predictions::RankedPrediction;
use crate::curator::ProbeQuery;
use crate::encoders::Encoder;
use crate::error::{ProbeError, Result};

/// Which entities a query may retrieve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidateScope {
    /// Every entity in the index.
    #[default]
    Full,
    /// Only entities that are gold answers of some query of the same
    /// relation. Inflates accuracy; for analysis only.
    Relation,
}

impl FromStr for CandidateScope {
    type Err = ProbeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(CandidateScope::Full),
            "relation" => Ok(CandidateScope::Relation),
            other => Err(ProbeError::Config(format!("unknown candidate scope {other:?}"))),
        }
    }
}

/// Per-relation allow-masks over the index for [`CandidateScope::Relation`].
pub fn relation_scopes(index: &EntityIndex, queries: &[ProbeQuery]) -> HashMap<String, Vec<bool>> {
    let mut out: HashMap<String, Vec<bool>> = HashMap::new();
    for q in queries {
        let mask = out
            .entry(q.relation_id.clone())
            .or_insert_with(|| vec![false; index.len()]);
        for a in &q.answers {
            if let Some(i) = index.position(a) {
                mask[i] = true;
            }
        }
    }
    out
}

/// Top-`k` entities by cosine similarity to `query` (need not be unit
/// length). Ties keep index order.
pub fn rank_by_cosine(
    index: &EntityIndex,
    query: ArrayView1<f64>,
    k: usize,
    allowed: Option<&[bool]>,
) -> Vec<(usize, f64)> {
    let norm = query.dot(&query).sqrt();
    let sims = index.vectors().dot(&query) / norm;
    let mut order: Vec<usize> = match allowed {
        Some(mask) => (0..index.len()).filter(|&i| mask[i]).collect(),
        None => (0..index.len()).collect(),
    };
    order.sort_by(|&a, &b| sims[b].total_cmp(&sims[a]));
    order.truncate(k);
    order.into_iter().map(|i| (i, sims[i])).collect()
}

pub fn contrastive_probe(
    encoder: &dyn Encoder,
    index: &EntityIndex,
    queries: &[ProbeQuery],
    k: usize,
) -> Result<Vec<RankedPrediction>> {
    contrastive_probe_scoped(encoder, index, queries, k, CandidateScope::Full)
}

/// Retrieval probing: encode each query with the index's encoder and depth,
/// rank all (or relation-scoped) entities by cosine similarity.
pub fn contrastive_probe_scoped(
    encoder: &dyn Encoder,
    index: &EntityIndex,
    queries: &[ProbeQuery],
    k: usize,
    scope: CandidateScope,
) -> Result<Vec<RankedPrediction>> {
    if encoder.identity() != index.encoder_identity() {
        return Err(ProbeError::Config(format!(
            "entity index was built by {:?} but queries would be encoded by {:?}",
            index.encoder_identity(),
            encoder.identity()
        )));
    }
    let scopes = match scope {
        CandidateScope::Full => HashMap::new(),
        CandidateScope::Relation => relation_scopes(index, queries),
    };
    let mut out = Vec::with_capacity(queries.len());
    for chunk in queries.chunks(256) {
        let texts: Vec<&str> = chunk.iter().map(|q| q.query_text.as_str()).collect();
        let vectors = encoder.encode(&texts, index.layer_limit())?;
        for (q, v) in chunk.iter().zip(vectors.rows()) {
            let allowed = scopes.get(&q.relation_id).map(Vec::as_slice);
            let candidates = rank_by_cosine(index, v, k, allowed)
                .into_iter()
                .map(|(i, s)| (index.entity_names()[i].clone(), s))
                .collect();
            out.push(RankedPrediction {
                query_id: q.query_id.clone(),
                strategy: "contrastive".into(),
                candidates,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::ReferenceEncoder;
    use crate::probers::index::build_entity_index;

    fn query(id: &str, text: &str, answers: &[&str]) -> ProbeQuery {
        ProbeQuery {
            query_id: id.into(),
            relation_id: "r".into(),
            head_name: "h".into(),
            query_text: text.into(),
            answers: answers.iter().map(|s| s.to_string()).collect(),
            hard: true,
        }
    }

    #[test]
    fn identical_text_ranks_first_and_k_covers_all() {
        let enc = ReferenceEncoder::with_dim_seed(32, 5).unwrap();
        let names: Vec<String> = ["alpha", "beta gamma", "delta"].iter().map(|s| s.to_string()).collect();
        let idx = build_entity_index(&enc, &names, 4).unwrap();
        let preds = contrastive_probe(&enc, &idx, &[query("q", "beta gamma", &["x"])], 10).unwrap();
        assert_eq!(preds[0].candidates.len(), 3);
        assert_eq!(preds[0].candidates[0].0, "beta gamma");
        assert!((preds[0].candidates[0].1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identity_mismatch_is_rejected() {
        let a = ReferenceEncoder::with_dim_seed(16, 1).unwrap();
        let b = ReferenceEncoder::with_dim_seed(16, 2).unwrap();
        let idx = build_entity_index(&a, &["x".to_string()], 1).unwrap();
        assert!(matches!(
            contrastive_probe(&b, &idx, &[query("q", "t [MASK]", &["x"])], 1),
            Err(ProbeError::Config(_))
        ));
    }

    #[test]
    fn relation_scope_restricts_candidates() {
        let enc = ReferenceEncoder::with_dim_seed(16, 1).unwrap();
        let names: Vec<String> = ["a1", "b2", "c3"].iter().map(|s| s.to_string()).collect();
        let idx = build_entity_index(&enc, &names, 1).unwrap();
        let qs = [query("q", "text [MASK]", &["b2"])];
        let p = contrastive_probe_scoped(&enc, &idx, &qs, 10, CandidateScope::Relation).unwrap();
        assert_eq!(p[0].candidates.len(), 1);
        assert_eq!(p[0].candidates[0].0, "b2");
    }
}
