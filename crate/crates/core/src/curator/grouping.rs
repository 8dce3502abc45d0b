use std::collections::{BTreeMap, HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::ProbeQuery;
use super::templates::TemplateRegistry;
use super::triples::KnowledgeTriple;
use crate::error::{ProbeError, Result};
use crate::text::{fnv1a64, normalize_key};

pub const DEFAULT_MASK_PLACEHOLDER: &str = "[MASK]";

#[derive(Debug, Clone, PartialEq)]
pub struct GroupingConfig {
    pub max_answers: usize,
    pub per_relation_cap: usize,
    pub seed: u64,
    pub mask_placeholder: String,
}

impl Default for GroupingConfig {
    fn default() -> Self {
        GroupingConfig {
            max_answers: 10,
            per_relation_cap: 1000,
            seed: 0,
            mask_placeholder: DEFAULT_MASK_PLACEHOLDER.to_string(),
        }
    }
}

struct Group {
    head_name: String,
    answers: Vec<String>,
    seen: HashSet<String>,
}

/// Per-relation generator, so each relation can be sampled independently of
/// the others.
pub(crate) fn relation_rng(seed: u64, relation_id: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(relation_id.as_bytes()))
}

/// Merges triples into cloze queries.
///
/// Triples sharing `(head_name, relation_id)` become one query. Groups with
/// more than `max_answers` distinct tails are discarded *before* the
/// per-relation sample of at most `per_relation_cap` queries is drawn.
/// Relations are emitted in lexicographic order; within a relation, queries
/// keep the order in which their head first appeared.
pub fn group_queries(
    triples: &[KnowledgeTriple],
    templates: &TemplateRegistry,
    config: &GroupingConfig,
) -> Result<Vec<ProbeQuery>> {
    if config.max_answers == 0 {
        return Err(ProbeError::Config("max_answers must be at least 1".into()));
    }
    let mut by_relation: BTreeMap<&str, Vec<Group>> = BTreeMap::new();
    let mut slot: HashMap<(&str, &str), usize> = HashMap::new();
    for t in triples {
        if templates.get(&t.relation_id).is_none() {
            return Err(ProbeError::Config(format!(
                "no prompt template for relation {:?}",
                t.relation_id
            )));
        }
        let groups = by_relation.entry(t.relation_id.as_str()).or_default();
        let idx = *slot
            .entry((t.relation_id.as_str(), t.head_name.as_str()))
            .or_insert_with(|| {
                groups.push(Group {
                    head_name: t.head_name.clone(),
                    answers: Vec::new(),
                    seen: HashSet::new(),
                });
                groups.len() - 1
            });
        let g = &mut groups[idx];
        if g.seen.insert(normalize_key(&t.tail_name)) {
            g.answers.push(t.tail_name.clone());
        }
    }

    let mut out = Vec::new();
    for (relation_id, groups) in by_relation {
        let template = templates.get(relation_id).expect("checked above");
        let kept: Vec<Group> = groups
            .into_iter()
            .filter(|g| g.answers.len() <= config.max_answers)
            .collect();
        let chosen: Vec<usize> = if kept.len() > config.per_relation_cap {
            let mut rng = relation_rng(config.seed, relation_id);
            let mut idx = rand::seq::index::sample(&mut rng, kept.len(), config.per_relation_cap).into_vec();
            idx.sort_unstable();
            idx
        } else {
            (0..kept.len()).collect()
        };
        for (n, i) in chosen.into_iter().enumerate() {
            let g = &kept[i];
            out.push(ProbeQuery {
                query_id: format!("{relation_id}-{n:04}"),
                relation_id: relation_id.to_string(),
                head_name: g.head_name.clone(),
                query_text: template.instantiate(&g.head_name, &config.mask_placeholder),
                answers: g.answers.clone(),
                hard: false,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> TemplateRegistry {
        TemplateRegistry::bundled()
    }

    fn t(h: &str, r: &str, tail: &str) -> KnowledgeTriple {
        KnowledgeTriple::new(h, r, tail)
    }

    #[test]
    fn shared_head_merges() {
        let qs = group_queries(
            &[t("A", "may_treat", "B"), t("A", "may_treat", "C")],
            &reg(),
            &GroupingConfig::default(),
        )
        .unwrap();
        assert_eq!(qs.len(), 1);
        assert_eq!(qs[0].answers, vec!["B", "C"]);
        assert_eq!(qs[0].query_text, "A might treat [MASK] .");
    }

    #[test]
    fn duplicate_tails_collapse_under_normalization() {
        let qs = group_queries(
            &[t("A", "may_treat", "Foo Bar"), t("A", "may_treat", "foo  bar")],
            &reg(),
            &GroupingConfig::default(),
        )
        .unwrap();
        assert_eq!(qs[0].answers, vec!["Foo Bar"]);
    }

    #[test]
    fn eleven_tails_discarded() {
        let triples: Vec<_> = (0..11).map(|i| t("A", "may_treat", &format!("T{i}"))).collect();
        let qs = group_queries(&triples, &reg(), &GroupingConfig::default()).unwrap();
        assert!(qs.is_empty());
        let qs = group_queries(&triples[..10], &reg(), &GroupingConfig::default()).unwrap();
        assert_eq!(qs[0].answers.len(), 10);
    }

    #[test]
    fn cap_samples_deterministically() {
        let triples: Vec<_> = (0..1500).map(|i| t(&format!("H{i}"), "may_treat", "T")).collect();
        let cfg = GroupingConfig {
            seed: 11,
            ..Default::default()
        };
        let a = group_queries(&triples, &reg(), &cfg).unwrap();
        let b = group_queries(&triples, &reg(), &cfg).unwrap();
        assert_eq!(a.len(), 1000);
        assert_eq!(a, b);
        let other = group_queries(&triples, &reg(), &GroupingConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(
            a.iter().map(|q| &q.head_name).collect::<Vec<_>>(),
            other.iter().map(|q| &q.head_name).collect::<Vec<_>>()
        );
    }

    #[test]
    fn missing_template_is_config_error() {
        let err = group_queries(&[t("A", "nope", "B")], &reg(), &GroupingConfig::default()).unwrap_err();
        assert!(matches!(err, ProbeError::Config(_)));
    }
}
