use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ProbeError, Result};

/// Words in a sentence, not counting a standalone final punctuation token.
pub fn word_count(sentence: &str) -> usize {
    let tokens: Vec<&str> = sentence.split_whitespace().collect();
    match tokens.last() {
        Some(last) if last.chars().all(|c| c.is_ascii_punctuation()) => tokens.len() - 1,
        _ => tokens.len(),
    }
}

/// Uniform reservoir sample of `n` sentences whose word count lies in
/// `[min_words, max_words]`. The sample is returned in corpus order.
pub fn sample_sentences<R: BufRead>(
    corpus: R,
    n: usize,
    seed: u64,
    min_words: usize,
    max_words: usize,
) -> Result<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reservoir: Vec<(usize, String)> = Vec::with_capacity(n);
    let mut eligible = 0usize;
    for line in corpus.lines() {
        let line = line?;
        let sentence = line.trim();
        let w = word_count(sentence);
        if w < min_words || w > max_words {
            continue;
        }
        if reservoir.len() < n {
            reservoir.push((eligible, sentence.to_string()));
        } else if n > 0 {
            let j = rng.random_range(0..=eligible);
            if j < n {
                reservoir[j] = (eligible, sentence.to_string());
            }
        }
        eligible += 1;
    }
    if eligible < n {
        return Err(ProbeError::InsufficientCorpus { requested: n, eligible });
    }
    reservoir.sort_by_key(|(i, _)| *i);
    Ok(reservoir.into_iter().map(|(_, s)| s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(n: usize) -> String {
        (0..n)
            .map(|i| format!("sentence number {i} has several words .\n"))
            .collect()
    }

    #[test]
    fn exact_size_returns_everything_in_order() {
        let c = corpus(20);
        let s = sample_sentences(c.as_bytes(), 20, 1, 5, 64).unwrap();
        assert_eq!(s.len(), 20);
        assert!(s[0].contains("number 0 "));
        assert!(s[19].contains("number 19 "));
    }

    #[test]
    fn deterministic_per_seed() {
        let c = corpus(1000);
        let a = sample_sentences(c.as_bytes(), 10, 5, 5, 64).unwrap();
        let b = sample_sentences(c.as_bytes(), 10, 5, 5, 64).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn length_filter_and_insufficient_corpus() {
        let c = "too short .\none two three four five six .\n";
        let err = sample_sentences(c.as_bytes(), 2, 0, 5, 64).unwrap_err();
        assert!(matches!(
            err,
            ProbeError::InsufficientCorpus {
                requested: 2,
                eligible: 1
            }
        ));
        assert_eq!(word_count("one two three ."), 3);
        assert_eq!(word_count("one two three."), 3);
    }
}
