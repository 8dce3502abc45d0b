//! Benchmark construction: triple dumps in, full/hard cloze query sets out.

pub mod dataset;
pub mod grouping;
pub mod hardness;
pub mod templates;
pub mod triples;

use std::collections::BTreeMap;

pub use dataset::{load_dataset, read_dataset, save_dataset, write_dataset, ProbeQuery, MAX_GOLD_ANSWERS};
pub use grouping::{group_queries, GroupingConfig, DEFAULT_MASK_PLACEHOLDER};
pub use hardness::{avg_match, hardness, lcs_len, rouge_l, rouge_l_tokens, split_hard, Hardness};
pub use templates::{instantiate_prompt, PromptTemplate, TemplateRegistry};
pub use triples::{load_triples, load_triples_file, KnowledgeTriple, MalformedLine, TripleLoad};

/// Full and hard query counts for one relation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SplitCounts {
    pub full: usize,
    pub hard: usize,
}

pub fn split_counts(queries: &[ProbeQuery]) -> BTreeMap<String, SplitCounts> {
    let mut out: BTreeMap<String, SplitCounts> = BTreeMap::new();
    for q in queries {
        let c = out.entry(q.relation_id.clone()).or_default();
        c.full += 1;
        if q.hard {
            c.hard += 1;
        }
    }
    out
}

/// Group, then flag hard queries with the default thresholds.
pub fn curate(
    triples: &[KnowledgeTriple],
    templates: &TemplateRegistry,
    config: &GroupingConfig,
) -> crate::Result<Vec<ProbeQuery>> {
    let mut queries = group_queries(triples, templates, config)?;
    split_hard(
        &mut queries,
        hardness::DEFAULT_MATCH_THRESHOLD,
        hardness::DEFAULT_ROUGE_THRESHOLD,
    )?;
    Ok(queries)
}
