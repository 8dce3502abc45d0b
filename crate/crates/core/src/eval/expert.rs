use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curator::ProbeQuery;
use crate::error::{ProbeError, Result};
use crate::probers::RankedPrediction;
use crate::text::normalize_answer;

/// A human score for one predicted candidate, 1 (unrelated) to 5 (perfect).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertAnnotation {
    pub query_id: String,
    pub candidate: String,
    pub score: u8,
}

impl ExpertAnnotation {
    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.score) {
            return Err(ProbeError::Validation(format!(
                "annotation score {} for ({}, {:?}) outside 1..=5",
                self.score, self.query_id, self.candidate
            )));
        }
        Ok(())
    }
}

/// Reads a `query_id,candidate,score` CSV with a header row.
pub fn read_annotations<R: Read>(r: R, path: &Path) -> Result<Vec<ExpertAnnotation>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<ExpertAnnotation>().enumerate() {
        let a = rec.map_err(|e| ProbeError::Schema {
            path: path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?;
        a.validate().map_err(|e| ProbeError::Schema {
            path: path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?;
        out.push(a);
    }
    Ok(out)
}

pub fn load_annotations(path: &Path) -> Result<Vec<ExpertAnnotation>> {
    let f = std::fs::File::open(path).map_err(|e| ProbeError::input(path, e))?;
    read_annotations(f, path)
}

/// Counts of one score level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionRow {
    pub top1_yes: usize,
    pub top1_no: usize,
    pub topk_yes: usize,
    pub topk_no: usize,
}

impl ConfusionRow {
    /// Sum of all four cells, as printed in the table's last column.
    pub fn sum(&self) -> usize {
        self.top1_yes + self.top1_no + self.topk_yes + self.topk_no
    }

    pub fn topk(&self) -> usize {
        self.topk_yes + self.topk_no
    }
}

/// Annotation score × gold-match counts. "yes"/"no" is gold-set membership.
/// The top-1 columns count rank-1 candidates only; the top-k columns count
/// every candidate up to rank k, so top-1 is a subset of top-k.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionTable {
    pub k: usize,
    /// Keyed by score 1..=5; every level is present.
    pub rows: BTreeMap<u8, ConfusionRow>,
}

impl ConfusionTable {
    pub fn new(k: usize) -> Self {
        ConfusionTable {
            k,
            rows: (1..=5).map(|s| (s, ConfusionRow::default())).collect(),
        }
    }

    /// Builds a table from `(score, [top1_yes, top1_no, topk_yes, topk_no])`.
    pub fn from_counts(k: usize, counts: &[(u8, [usize; 4])]) -> Result<Self> {
        let mut t = ConfusionTable::new(k);
        for &(s, [a, b, c, d]) in counts {
            let row = t
                .rows
                .get_mut(&s)
                .ok_or_else(|| ProbeError::Validation(format!("score {s} outside 1..=5")))?;
            *row = ConfusionRow {
                top1_yes: a,
                top1_no: b,
                topk_yes: c,
                topk_no: d,
            };
        }
        Ok(t)
    }

    pub fn row(&self, score: u8) -> ConfusionRow {
        self.rows.get(&score).copied().unwrap_or_default()
    }

    pub fn top1_total(&self) -> usize {
        self.rows.values().map(|r| r.top1_yes + r.top1_no).sum()
    }

    pub fn topk_total(&self) -> usize {
        self.rows.values().map(ConfusionRow::topk).sum()
    }

    pub fn topk_gold_hits(&self) -> usize {
        self.rows.values().map(|r| r.topk_yes).sum()
    }

    /// Gold-matching top-k candidates over all top-k candidates.
    pub fn gold_rate(&self) -> f64 {
        ratio(self.topk_gold_hits(), self.topk_total())
    }

    /// Top-k candidates scored at or above `threshold`, over all top-k
    /// candidates.
    pub fn annotated_rate_topk(&self, threshold: u8) -> f64 {
        let n = self.rows.range(threshold..).map(|(_, r)| r.topk()).sum();
        ratio(n, self.topk_total())
    }

    /// Same ratio computed from the printed row totals, which add the top-1
    /// cells to the top-k cells.
    pub fn annotated_rate_row_sum(&self, threshold: u8) -> f64 {
        let n = self.rows.range(threshold..).map(|(_, r)| r.sum()).sum();
        ratio(n, self.topk_total())
    }

    /// Human-readable notes where the two ways of counting disagree.
    pub fn discrepancies(&self, threshold: u8) -> Vec<String> {
        let strict: usize = self.rows.range(threshold..).map(|(_, r)| r.topk()).sum();
        let summed: usize = self.rows.range(threshold..).map(|(_, r)| r.sum()).sum();
        let total = self.topk_total();
        let mut notes = Vec::new();
        if strict != summed {
            notes.push(format!(
                "score>={threshold}: top-{} cells give {strict}/{total}, row totals give {summed}/{total}",
                self.k
            ));
        }
        notes
    }
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertRescore {
    pub k: usize,
    pub perfect_threshold: u8,
    pub queries: usize,
    /// Fraction of sampled queries with a gold answer in the top k.
    pub gold_acc: f64,
    /// Fraction of sampled queries with a top-k candidate scored at or above
    /// the threshold.
    pub annotated_acc: f64,
    pub candidates: usize,
    pub gold_candidates: usize,
    pub perfect_candidates: usize,
    pub table: ConfusionTable,
    pub notes: Vec<String>,
}

/// Rescores the annotated subset of `predictions`.
///
/// A query is sampled when any annotation names it. Every top-k candidate of
/// a sampled query needs exactly one annotation; all gaps are listed in the
/// error.
pub fn expert_rescore(
    predictions: &[RankedPrediction],
    annotations: &[ExpertAnnotation],
    queries: &[ProbeQuery],
    k: usize,
    perfect_threshold: u8,
) -> Result<ExpertRescore> {
    if k == 0 {
        return Err(ProbeError::Config("k must be positive".into()));
    }
    let mut scores: HashMap<(&str, String), u8> = HashMap::new();
    for a in annotations {
        a.validate()?;
        if scores
            .insert((a.query_id.as_str(), normalize_answer(&a.candidate)), a.score)
            .is_some()
        {
            return Err(ProbeError::Validation(format!(
                "duplicate annotation for ({}, {:?})",
                a.query_id, a.candidate
            )));
        }
    }
    let sampled: HashSet<&str> = annotations.iter().map(|a| a.query_id.as_str()).collect();
    let gold: HashMap<&str, HashSet<String>> = queries
        .iter()
        .map(|q| {
            (
                q.query_id.as_str(),
                q.answers.iter().map(|a| normalize_answer(a)).collect(),
            )
        })
        .collect();

    let mut table = ConfusionTable::new(k);
    let mut missing = Vec::new();
    let (mut n_queries, mut gold_q, mut perfect_q) = (0usize, 0usize, 0usize);
    let (mut n_cand, mut gold_c, mut perfect_c) = (0usize, 0usize, 0usize);
    let mut seen = HashSet::new();
    for p in predictions.iter().filter(|p| sampled.contains(p.query_id.as_str())) {
        let gold_set = gold
            .get(p.query_id.as_str())
            .ok_or_else(|| ProbeError::Validation(format!("annotated query_id {:?} not in dataset", p.query_id)))?;
        seen.insert(p.query_id.as_str());
        n_queries += 1;
        let (mut any_gold, mut any_perfect) = (false, false);
        for (rank, cand) in p.top(k).enumerate() {
            let key = normalize_answer(cand);
            let is_gold = gold_set.contains(&key);
            let Some(&score) = scores.get(&(p.query_id.as_str(), key)) else {
                missing.push(format!("({}, {:?})", p.query_id, cand));
                continue;
            };
            let row = table.rows.get_mut(&score).expect("validated score");
            if is_gold {
                row.topk_yes += 1;
            } else {
                row.topk_no += 1;
            }
            if rank == 0 {
                if is_gold {
                    row.top1_yes += 1;
                } else {
                    row.top1_no += 1;
                }
            }
            let perfect = score >= perfect_threshold;
            n_cand += 1;
            gold_c += usize::from(is_gold);
            perfect_c += usize::from(perfect);
            any_gold |= is_gold;
            any_perfect |= perfect;
        }
        gold_q += usize::from(any_gold);
        perfect_q += usize::from(any_perfect);
    }
    if !missing.is_empty() {
        return Err(ProbeError::Validation(format!(
            "missing annotations: {}",
            missing.join(", ")
        )));
    }
    if let Some(q) = sampled.iter().find(|q| !seen.contains(*q)) {
        return Err(ProbeError::Validation(format!(
            "annotated query_id {q:?} has no prediction"
        )));
    }
    let notes = table.discrepancies(perfect_threshold);
    Ok(ExpertRescore {
        k,
        perfect_threshold,
        queries: n_queries,
        gold_acc: ratio(gold_q, n_queries),
        annotated_acc: ratio(perfect_q, n_queries),
        candidates: n_cand,
        gold_candidates: gold_c,
        perfect_candidates: perfect_c,
        table,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(id: &str, answers: &[&str]) -> ProbeQuery {
        ProbeQuery {
            query_id: id.into(),
            relation_id: "r".into(),
            head_name: "h".into(),
            query_text: "h [MASK]".into(),
            answers: answers.iter().map(|s| s.to_string()).collect(),
            hard: false,
        }
    }

    fn pred(id: &str, c: &[&str]) -> RankedPrediction {
        RankedPrediction {
            query_id: id.into(),
            strategy: "t".into(),
            candidates: c
                .iter()
                .enumerate()
                .map(|(i, s)| (s.to_string(), -(i as f64)))
                .collect(),
        }
    }

    fn ann(id: &str, c: &str, s: u8) -> ExpertAnnotation {
        ExpertAnnotation {
            query_id: id.into(),
            candidate: c.into(),
            score: s,
        }
    }

    #[test]
    fn all_perfect_scores_give_full_accuracy() {
        let q = [query("q1", &["z"]), query("q2", &["a"])];
        let p = [pred("q1", &["a", "b"]), pred("q2", &["a", "c"])];
        let a: Vec<_> = ["a", "b"]
            .iter()
            .map(|c| ann("q1", c, 5))
            .chain(["a", "c"].iter().map(|c| ann("q2", c, 5)))
            .collect();
        let r = expert_rescore(&p, &a, &q, 10, 5).unwrap();
        assert_eq!(r.annotated_acc, 1.0);
        assert_eq!(r.table.annotated_rate_topk(5), 1.0);
        assert_eq!(r.gold_acc, 0.5);
        assert_eq!(r.table.row(5).top1_yes, 1);
        assert_eq!(r.table.row(5).topk_yes, 1);
        assert_eq!(r.table.row(5).topk_no, 3);
    }

    #[test]
    fn threshold_one_accepts_everything() {
        let q = [query("q1", &["z"])];
        let p = [pred("q1", &["a", "b"])];
        let a = [ann("q1", "a", 1), ann("q1", "b", 2)];
        let r = expert_rescore(&p, &a, &q, 10, 1).unwrap();
        assert_eq!(r.annotated_acc, 1.0);
    }

    #[test]
    fn missing_annotations_are_listed() {
        let q = [query("q1", &["z"])];
        let p = [pred("q1", &["a", "b", "c"])];
        let err = expert_rescore(&p, &[ann("q1", "a", 3)], &q, 10, 5)
            .unwrap_err()
            .to_string();
        assert!(err.contains("\"b\"") && err.contains("\"c\""), "{err}");
    }

    #[test]
    fn bad_score_rejected() {
        assert!(ann("q", "a", 6).validate().is_err());
        assert!(ann("q", "a", 0).validate().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let text = "query_id,candidate,score\nq1,hepatitis b,5\nq1, fever ,2\n";
        let a = read_annotations(text.as_bytes(), Path::new("a.csv")).unwrap();
        assert_eq!(a[1], ann("q1", "fever", 2));
        let bad = "query_id,candidate,score\nq1,x,9\n";
        let err = read_annotations(bad.as_bytes(), Path::new("a.csv")).unwrap_err();
        assert!(matches!(err, ProbeError::Schema { line: 2, .. }));
    }
}
