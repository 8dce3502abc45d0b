//! Deterministic synthetic fixtures for demos and tests.
//!
//! Names are pronounceable pseudo-words, so no real biomedical data is
//! involved. Twenty heads each take part in three relations; six tails reuse
//! their head's name and therefore land in the easy split.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curator::{save_dataset, KnowledgeTriple, ProbeQuery};
use crate::encoders::{MaskRule, TableMlm};
use crate::error::Result;
use crate::eval::ExpertAnnotation;
use crate::probers::{save_predictions, RankedPrediction};
use crate::rewire::RewireConfig;

pub const FIXTURE_SEED: u64 = 7;
pub const FIXTURE_RELATIONS: [&str; 3] = ["may_prevent", "may_treat", "has_physiologic_effect"];
pub const TRIPLES_FILE: &str = "triples.tsv";
pub const CORPUS_FILE: &str = "corpus.txt";
pub const ENTITIES_FILE: &str = "entities.txt";
pub const STUB_MLM_FILE: &str = "stub_mlm.json";
pub const REWIRE_FILE: &str = "rewire.json";
pub const EXPERT_DATASET_FILE: &str = "expert_dataset.jsonl";
pub const EXPERT_PREDICTIONS_FILE: &str = "expert_predictions.jsonl";
pub const EXPERT_ANNOTATIONS_FILE: &str = "expert_annotations.csv";
/// Encoder spec used with the bundled fixtures.
pub const FIXTURE_ENCODER: &str = "reference:dim=128,seed=7";

const HEADS: usize = 20;
const DISTRACTORS: usize = 90;
const FILLERS: usize = 20;
const ADVERBS: [&str; 3] = ["often", "reliably", "strongly"];
const TAIL_SUFFIXES: [&str; 8] = [
    "deficiency",
    "syndrome",
    "toxicity",
    "disorder",
    "lesion",
    "fever",
    "spasm",
    "atrophy",
];
/// Heads whose `may_prevent` tail contains the head name.
const EASY_HEADS: usize = 6;

fn verb(relation: &str) -> &'static str {
    match relation {
        "may_prevent" => "prevents",
        "may_treat" => "treats",
        _ => "affects",
    }
}

struct Words {
    rng: ChaCha8Rng,
    used: HashSet<String>,
}

impl Words {
    fn new(seed: u64) -> Self {
        Words {
            rng: ChaCha8Rng::seed_from_u64(seed),
            used: HashSet::new(),
        }
    }

    fn next(&mut self) -> String {
        const ONSETS: [&str; 16] = [
            "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr",
        ];
        const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
        const CODAS: [&str; 6] = ["n", "x", "l", "r", "s", "m"];
        loop {
            let syllables = self.rng.random_range(2..=3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(ONSETS[self.rng.random_range(0..ONSETS.len())]);
                w.push_str(VOWELS[self.rng.random_range(0..VOWELS.len())]);
            }
            w.push_str(CODAS[self.rng.random_range(0..CODAS.len())]);
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn suffix(&mut self) -> &'static str {
        TAIL_SUFFIXES[self.rng.random_range(0..TAIL_SUFFIXES.len())]
    }
}

/// Bundled fixture contents, all derived from one seed.
#[derive(Debug, Clone)]
pub struct Fixtures {
    pub triples: Vec<KnowledgeTriple>,
    pub corpus: Vec<String>,
    pub entities: Vec<String>,
}

impl Fixtures {
    pub fn generate(seed: u64) -> Self {
        let mut words = Words::new(seed);
        let heads: Vec<String> = (0..HEADS).map(|_| words.next()).collect();
        let mut triples = Vec::new();
        for (h, head) in heads.iter().enumerate() {
            for relation in FIXTURE_RELATIONS {
                let tail = if relation == "may_prevent" && h < EASY_HEADS {
                    format!("{head} {}", words.suffix())
                } else {
                    format!("{} {}", words.next(), words.suffix())
                };
                triples.push(KnowledgeTriple::new(head, relation, &tail));
            }
        }

        let mut corpus = Vec::new();
        for t in &triples {
            for adverb in ADVERBS {
                corpus.push(format!(
                    "{} {adverb} {} {} .",
                    capitalize(&t.head_name),
                    verb(&t.relation_id),
                    t.tail_name
                ));
            }
        }
        for _ in 0..FILLERS {
            let w: Vec<String> = (0..6).map(|_| words.next()).collect();
            corpus.push(format!("{} {} .", capitalize(&w[0]), w[1..].join(" ")));
        }

        let mut entities: BTreeSet<String> = triples.iter().map(|t| t.tail_name.clone()).collect();
        while entities.len() < triples.len() + DISTRACTORS {
            entities.insert(format!("{} {}", words.next(), words.suffix()));
        }
        Fixtures {
            triples,
            corpus,
            entities: entities.into_iter().collect(),
        }
    }

    pub fn triples_tsv(&self) -> String {
        let mut s = String::from("# head\trelation\ttail\n");
        for t in &self.triples {
            s.push_str(&format!("{}\t{}\t{}\n", t.head_name, t.relation_id, t.tail_name));
        }
        s
    }

    /// Writes triples, corpus, entities, stub MLM and rewire config to `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(TRIPLES_FILE), self.triples_tsv())?;
        std::fs::write(dir.join(CORPUS_FILE), lines(&self.corpus))?;
        std::fs::write(dir.join(ENTITIES_FILE), lines(&self.entities))?;
        std::fs::write(dir.join(STUB_MLM_FILE), self.stub_mlm()?.to_json()? + "\n")?;
        std::fs::write(dir.join(REWIRE_FILE), fixture_rewire_config().to_json_pretty()? + "\n")?;
        let expert = ExpertSample::generate();
        save_dataset(&expert.queries, &dir.join(EXPERT_DATASET_FILE))?;
        save_predictions(&expert.predictions, &dir.join(EXPERT_PREDICTIONS_FILE))?;
        let mut w = csv::Writer::from_path(dir.join(EXPERT_ANNOTATIONS_FILE))?;
        for a in &expert.annotations {
            w.serialize(a)?;
        }
        w.flush()?;
        Ok(())
    }

    /// A bigram stub over the tail vocabulary: the relation's last prompt
    /// word predicts first tail words, a first word predicts its suffixes,
    /// and a suffix predicts the stop token.
    pub fn stub_mlm(&self) -> Result<TableMlm> {
        let prompt_word = |r: &str| match r {
            "may_prevent" => "prevent",
            "may_treat" => "treat",
            _ => "of",
        };
        let mut first: BTreeMap<&str, BTreeMap<String, f64>> = BTreeMap::new();
        let mut second: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        let mut vocab: BTreeSet<String> = [".".to_string()].into_iter().collect();
        for t in &self.triples {
            let mut parts = t.tail_name.split_whitespace();
            let (a, b) = (parts.next().unwrap_or_default(), parts.next().unwrap_or_default());
            *first
                .entry(prompt_word(&t.relation_id))
                .or_default()
                .entry(a.to_string())
                .or_default() += 1.0;
            *second
                .entry(a.to_string())
                .or_default()
                .entry(b.to_string())
                .or_default() += 1.0;
            vocab.insert(a.to_string());
            vocab.insert(b.to_string());
        }
        let mut rules: Vec<MaskRule> = first
            .into_iter()
            .map(|(left, weights)| MaskRule {
                position: None,
                left: Some(left.to_string()),
                weights,
            })
            .collect();
        rules.extend(second.into_iter().map(|(left, weights)| MaskRule {
            position: None,
            left: Some(left),
            weights,
        }));
        for s in TAIL_SUFFIXES {
            if vocab.contains(s) {
                rules.push(MaskRule {
                    position: None,
                    left: Some(s.to_string()),
                    weights: BTreeMap::from([(".".to_string(), 1.0)]),
                });
            }
        }
        TableMlm::new(
            "table-stub:fixtures",
            vocab.into_iter().collect(),
            "[MASK]",
            0.01,
            rules,
        )
    }
}

/// Top-10 predictions for 15 queries with a human score per candidate.
///
/// Built so that its score × gold-match counts are
///
/// | score | top-1 yes | top-1 no | top-10 yes | top-10 no |
/// |---|---|---|---|---|
/// | 5 | 4 | 1 | 13 | 20 |
/// | 4 | 1 | 2 | 3 | 8 |
/// | 3 | 0 | 5 | 0 | 54 |
/// | 2 | 0 | 2 | 0 | 52 |
/// | 1 | 0 | 0 | 0 | 0 |
#[derive(Debug, Clone)]
pub struct ExpertSample {
    pub queries: Vec<ProbeQuery>,
    pub predictions: Vec<RankedPrediction>,
    pub annotations: Vec<ExpertAnnotation>,
}

/// `(score, gold, top-1 count, top-10 count)` per cell of the table above.
pub const EXPERT_CELLS: [(u8, bool, usize, usize); 8] = [
    (5, true, 4, 13),
    (5, false, 1, 20),
    (4, true, 1, 3),
    (4, false, 2, 8),
    (3, true, 0, 0),
    (3, false, 5, 54),
    (2, true, 0, 0),
    (2, false, 2, 52),
];

impl ExpertSample {
    pub const QUERIES: usize = 15;
    pub const K: usize = 10;

    pub fn generate() -> Self {
        let n = Self::QUERIES;
        let mut ranked: Vec<Vec<(u8, bool)>> = vec![Vec::new(); n];
        let mut q = 0;
        for &(score, gold, top1, _) in &EXPERT_CELLS {
            for _ in 0..top1 {
                ranked[q].push((score, gold));
                q += 1;
            }
        }
        let rest: Vec<(u8, bool)> = EXPERT_CELLS
            .iter()
            .flat_map(|&(s, g, top1, topk)| std::iter::repeat_n((s, g), topk - top1))
            .collect();
        for (j, cell) in rest.into_iter().enumerate() {
            ranked[j % n].push(cell);
        }

        let mut queries = Vec::with_capacity(n);
        let mut predictions = Vec::with_capacity(n);
        let mut annotations = Vec::new();
        for (i, cells) in ranked.iter().enumerate() {
            let query_id = format!("expert-{i:04}");
            let names: Vec<String> = (0..cells.len()).map(|r| format!("answer {i} {r}")).collect();
            let mut gold: Vec<String> = cells
                .iter()
                .zip(&names)
                .filter(|((_, g), _)| *g)
                .map(|(_, name)| name.clone())
                .collect();
            if gold.is_empty() {
                gold.push(format!("answer {i} unlisted"));
            }
            queries.push(ProbeQuery {
                query_id: query_id.clone(),
                relation_id: "may_prevent".into(),
                head_name: format!("entity {i}"),
                query_text: format!("entity {i} may be able to prevent [MASK] ."),
                answers: gold,
                hard: true,
            });
            predictions.push(RankedPrediction {
                query_id: query_id.clone(),
                strategy: "contrastive".into(),
                candidates: names
                    .iter()
                    .enumerate()
                    .map(|(r, name)| (name.clone(), 1.0 - r as f64 / 10.0))
                    .collect(),
            });
            annotations.extend(cells.iter().zip(&names).map(|((score, _), name)| ExpertAnnotation {
                query_id: query_id.clone(),
                candidate: name.clone(),
                score: *score,
            }));
        }
        ExpertSample {
            queries,
            predictions,
            annotations,
        }
    }
}

/// Rewire settings for the bundled corpus and the reference encoder.
pub fn fixture_rewire_config() -> RewireConfig {
    RewireConfig {
        num_sentences: 200,
        mask_ratio: 0.5,
        temperature: 0.1,
        learning_rate: 0.05,
        steps: 500,
        batch_size: 32,
        checkpoint_every: 50,
        probe_checkpoint_step: 500,
        seed: FIXTURE_SEED,
        ..RewireConfig::default()
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn lines(items: &[String]) -> String {
    let mut s = items.join("\n");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewire::sampling::word_count;

    #[test]
    fn sizes() {
        let f = Fixtures::generate(FIXTURE_SEED);
        assert_eq!(f.triples.len(), 60);
        assert_eq!(f.corpus.len(), 200);
        assert_eq!(f.entities.len(), 150);
        assert!(f.corpus.iter().take(180).all(|s| word_count(s) == 5));
    }

    #[test]
    fn deterministic() {
        let a = Fixtures::generate(3);
        let b = Fixtures::generate(3);
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.entities, b.entities);
    }

    #[test]
    fn expert_sample_shape() {
        let e = ExpertSample::generate();
        assert_eq!(e.predictions.len(), 15);
        assert!(e.predictions.iter().all(|p| p.candidates.len() == 10));
        assert_eq!(e.annotations.len(), 150);
        assert!(e.queries.iter().all(|q| q.validate("[MASK]").is_ok()));
    }

    #[test]
    fn stub_is_valid() {
        Fixtures::generate(FIXTURE_SEED).stub_mlm().unwrap();
    }
}
