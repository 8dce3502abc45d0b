use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::curator::ProbeQuery;
use crate::error::{ProbeError, Result};
use crate::probers::RankedPrediction;
use crate::text::normalize_answer;

/// True iff a gold answer equals one of the top-`k` candidates after
/// [`normalize_answer`].
pub fn hit_at_k(prediction: &RankedPrediction, answers: &[String], k: usize) -> bool {
    let gold: HashSet<String> = answers.iter().map(|a| normalize_answer(a)).collect();
    prediction.top(k).any(|c| gold.contains(&normalize_answer(c)))
}

/// Per-query hit flags, aligned with the `ks` they were computed for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryHits {
    pub query_id: String,
    pub relation_id: String,
    pub hits: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationScore {
    pub count: usize,
    pub hits: BTreeMap<usize, usize>,
    pub acc: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalMetadata {
    pub seed: Option<u64>,
    pub layer_limit: Option<usize>,
    pub checkpoint_step: Option<usize>,
    /// Relations declared for the split but with no queries; left out of
    /// the macro average.
    pub empty_relations: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub strategy: String,
    pub split: String,
    pub ks: Vec<usize>,
    pub per_relation: BTreeMap<String, RelationScore>,
    pub macro_acc: BTreeMap<usize, f64>,
    pub micro_acc: BTreeMap<usize, f64>,
    pub total_queries: usize,
    pub metadata: EvalMetadata,
}

impl EvalReport {
    pub fn macro_at(&self, k: usize) -> Option<f64> {
        self.macro_acc.get(&k).copied()
    }

    pub fn micro_at(&self, k: usize) -> Option<f64> {
        self.micro_acc.get(&k).copied()
    }

    pub fn relation_acc(&self, relation_id: &str, k: usize) -> Option<f64> {
        self.per_relation.get(relation_id)?.acc.get(&k).copied()
    }
}

/// Macro and micro acc@k. `declared_relations` lists relations that should
/// appear even with zero queries; those are flagged instead of averaged.
pub fn aggregate(records: &[QueryHits], ks: &[usize], declared_relations: &[String]) -> EvalReport {
    let mut per: BTreeMap<String, (usize, Vec<usize>)> = BTreeMap::new();
    for r in records {
        let e = per
            .entry(r.relation_id.clone())
            .or_insert_with(|| (0, vec![0; ks.len()]));
        e.0 += 1;
        for (i, h) in r.hits.iter().enumerate() {
            e.1[i] += usize::from(*h);
        }
    }
    let mut empty: Vec<String> = declared_relations
        .iter()
        .filter(|r| !per.contains_key(*r))
        .cloned()
        .collect();
    empty.sort();
    empty.dedup();

    let mut per_relation = BTreeMap::new();
    let mut macro_sum = vec![0.0; ks.len()];
    let mut micro_hits = vec![0usize; ks.len()];
    let total: usize = per.values().map(|(c, _)| c).sum();
    for (rel, (count, hits)) in &per {
        let mut hit_map = BTreeMap::new();
        let mut acc_map = BTreeMap::new();
        for (i, &k) in ks.iter().enumerate() {
            let acc = hits[i] as f64 / *count as f64;
            hit_map.insert(k, hits[i]);
            acc_map.insert(k, acc);
            macro_sum[i] += acc;
            micro_hits[i] += hits[i];
        }
        per_relation.insert(
            rel.clone(),
            RelationScore {
                count: *count,
                hits: hit_map,
                acc: acc_map,
            },
        );
    }
    let n_rel = per.len();
    let ratio = |num: f64, den: usize| if den == 0 { 0.0 } else { num / den as f64 };
    let macro_acc = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, ratio(macro_sum[i], n_rel)))
        .collect();
    let micro_acc = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, ratio(micro_hits[i] as f64, total)))
        .collect();
    EvalReport {
        model: String::new(),
        strategy: String::new(),
        split: String::new(),
        ks: ks.to_vec(),
        per_relation,
        macro_acc,
        micro_acc,
        total_queries: total,
        metadata: EvalMetadata {
            empty_relations: empty,
            ..Default::default()
        },
    }
}

/// Matches predictions to queries and computes hits for each `k`.
///
/// Every prediction must name a query in `queries` and every query must
/// have exactly one prediction; the first violation is reported.
pub fn score_predictions(
    predictions: &[RankedPrediction],
    queries: &[ProbeQuery],
    ks: &[usize],
) -> Result<Vec<QueryHits>> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(ProbeError::Config("k values must be positive".into()));
    }
    let by_id: HashMap<&str, &ProbeQuery> = queries.iter().map(|q| (q.query_id.as_str(), q)).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(predictions.len());
    for p in predictions {
        let q = by_id
            .get(p.query_id.as_str())
            .ok_or_else(|| ProbeError::Validation(format!("prediction for unknown query_id {:?}", p.query_id)))?;
        if !seen.insert(p.query_id.as_str()) {
            return Err(ProbeError::Validation(format!(
                "duplicate prediction for query_id {:?}",
                p.query_id
            )));
        }
        out.push(QueryHits {
            query_id: q.query_id.clone(),
            relation_id: q.relation_id.clone(),
            hits: ks.iter().map(|&k| hit_at_k(p, &q.answers, k)).collect(),
        });
    }
    if let Some(missing) = queries.iter().find(|q| !seen.contains(q.query_id.as_str())) {
        return Err(ProbeError::Validation(format!(
            "no prediction for query_id {:?}",
            missing.query_id
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(c: &[&str]) -> RankedPrediction {
        RankedPrediction {
            query_id: "q".into(),
            strategy: "t".into(),
            candidates: c
                .iter()
                .enumerate()
                .map(|(i, s)| (s.to_string(), -(i as f64)))
                .collect(),
        }
    }

    fn answers(a: &[&str]) -> Vec<String> {
        a.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn hit_rank_three() {
        let p = pred(&["a", "b", "gold"]);
        assert!(hit_at_k(&p, &answers(&["gold"]), 10));
        assert!(!hit_at_k(&p, &answers(&["gold"]), 1));
        assert!(hit_at_k(&pred(&["Hepatitis B"]), &answers(&["hepatitis b"]), 1));
        assert!(!hit_at_k(&pred(&[]), &answers(&["x"]), 10));
    }

    fn rec(rel: &str, hit: bool) -> QueryHits {
        QueryHits {
            query_id: String::new(),
            relation_id: rel.into(),
            hits: vec![hit],
        }
    }

    #[test]
    fn macro_and_micro_diverge_on_unbalanced_counts() {
        let recs = vec![rec("A", true), rec("A", true), rec("A", true), rec("B", false)];
        let r = aggregate(&recs, &[1], &[]);
        assert_eq!(r.macro_at(1), Some(0.5));
        assert_eq!(r.micro_at(1), Some(0.75));
    }

    #[test]
    fn single_relation_and_empty_declared() {
        let recs = vec![rec("A", true), rec("A", false)];
        let r = aggregate(&recs, &[1], &["A".to_string(), "Z".to_string()]);
        assert_eq!(r.macro_at(1), Some(0.5));
        assert_eq!(r.micro_at(1), Some(0.5));
        assert_eq!(r.metadata.empty_relations, vec!["Z".to_string()]);
    }
}
