//! Leakage metrics used to separate easy queries from hard ones.
//!
//! Both metrics work on [`metric_tokens`]: lowercase whitespace tokens with
//! punctuation-only tokens removed.

use super::dataset::ProbeQuery;
use crate::error::{ProbeError, Result};
use crate::text::metric_tokens;

pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.1;
pub const DEFAULT_ROUGE_THRESHOLD: f64 = 0.1;

fn contains_contiguous(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Fraction of answers whose tokens appear as a contiguous run in the query.
pub fn avg_match(query_text: &str, answers: &[String]) -> Result<f64> {
    if answers.is_empty() {
        return Err(ProbeError::Precondition("avg_match needs at least one answer".into()));
    }
    let query = metric_tokens(query_text);
    let matched = answers
        .iter()
        .filter(|a| contains_contiguous(&query, &metric_tokens(a)))
        .count();
    Ok(matched as f64 / answers.len() as f64)
}

/// Length of the longest common subsequence, O(|a|·|b|) time, O(|b|) space.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L F-measure over token sequences (equal precision/recall weight).
pub fn rouge_l_tokens<T: PartialEq>(hypothesis: &[T], reference: &[T]) -> Result<f64> {
    if hypothesis.is_empty() || reference.is_empty() {
        return Err(ProbeError::Precondition(
            "rouge_l needs non-empty token sequences".into(),
        ));
    }
    let lcs = lcs_len(hypothesis, reference) as f64;
    let p = lcs / hypothesis.len() as f64;
    let r = lcs / reference.len() as f64;
    if p + r == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * p * r / (p + r))
}

pub fn rouge_l(hypothesis: &str, reference: &str) -> Result<f64> {
    rouge_l_tokens(&metric_tokens(hypothesis), &metric_tokens(reference))
}

/// Both leakage scores for one query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hardness {
    pub avg_match: f64,
    pub max_rouge_l: f64,
}

impl Hardness {
    pub fn is_hard(&self, match_threshold: f64, rouge_threshold: f64) -> bool {
        self.avg_match <= match_threshold && self.max_rouge_l <= rouge_threshold
    }
}

pub fn hardness(query: &ProbeQuery) -> Result<Hardness> {
    let avg = avg_match(&query.query_text, &query.answers)?;
    let q = metric_tokens(&query.query_text);
    let mut max_rouge = 0.0f64;
    for a in &query.answers {
        let a_tokens = metric_tokens(a);
        // An answer made only of punctuation cannot leak tokens.
        if a_tokens.is_empty() || q.is_empty() {
            continue;
        }
        max_rouge = max_rouge.max(rouge_l_tokens(&q, &a_tokens)?);
    }
    Ok(Hardness {
        avg_match: avg,
        max_rouge_l: max_rouge,
    })
}

/// Sets `hard` on every query. Nothing is removed.
pub fn split_hard(queries: &mut [ProbeQuery], match_threshold: f64, rouge_threshold: f64) -> Result<()> {
    for (name, v) in [
        ("match_threshold", match_threshold),
        ("rouge_threshold", rouge_threshold),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(ProbeError::Config(format!("{name} must lie in [0,1], got {v}")));
        }
    }
    for q in queries.iter_mut() {
        q.hard = hardness(q)?.is_hard(match_threshold, rouge_threshold);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn dengue_answer_inside_query() {
        let q = "Dengue virus live antigen CYD serotype 1 may be able to prevent [MASK] .";
        assert_eq!(avg_match(q, &s(&["Dengue"])).unwrap(), 1.0);
    }

    #[test]
    fn avg_match_partial_and_disjoint() {
        let q = "Aspirin may be able to prevent [MASK] .";
        assert_eq!(avg_match(q, &s(&["stroke"])).unwrap(), 0.0);
        assert_eq!(avg_match(q, &s(&["aspirin", "stroke"])).unwrap(), 0.5);
        // Tokens present but not contiguous.
        assert_eq!(avg_match(q, &s(&["aspirin prevent"])).unwrap(), 0.0);
        assert!(avg_match(q, &[]).is_err());
    }

    #[test]
    fn rouge_edge_cases() {
        assert_eq!(rouge_l("a b c", "a b c").unwrap(), 1.0);
        assert_eq!(rouge_l("a b c", "d e").unwrap(), 0.0);
        assert!(rouge_l(" . ", "a").is_err());
    }

    #[test]
    fn lcs_known_values() {
        assert_eq!(lcs_len(b"ABCBDAB", b"BDCABA"), 4);
        assert_eq!(lcs_len::<u8>(b"", b"abc"), 0);
    }

    #[test]
    fn split_flags() {
        let mk = |text: &str, answers: &[&str]| ProbeQuery {
            query_id: "q".into(),
            relation_id: "r".into(),
            head_name: "h".into(),
            query_text: text.into(),
            answers: s(answers),
            hard: false,
        };
        let mut qs = vec![
            mk("Dengue vaccine may be able to prevent [MASK] .", &["Dengue"]),
            mk("Entecavir may be able to prevent [MASK] .", &["Hepatitis B"]),
        ];
        split_hard(&mut qs, 0.1, 0.1).unwrap();
        assert!(!qs[0].hard);
        assert!(qs[1].hard);
        assert!(split_hard(&mut qs, 1.5, 0.1).is_err());
    }
}
