//! Shared string normalization.
//!
//! Three normalizations are used across the toolkit and they are deliberately
//! distinct:
//!
//! * [`normalize_key`]: lowercase + whitespace collapse. Used to deduplicate
//!   gold answers when grouping triples.
//! * [`normalize_answer`]: [`normalize_key`] plus stripping of leading and
//!   trailing punctuation. Used for answer matching at evaluation time and
//!   for entity uniqueness in the retrieval index.
//! * [`metric_tokens`]: lowercase whitespace tokens with punctuation-only
//!   tokens dropped. Used by the hardness metrics.

/// Lowercases and collapses runs of whitespace to a single space.
pub fn normalize_key(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Lowercases, collapses whitespace and strips outer punctuation.
pub fn normalize_answer(text: &str) -> String {
    let key = normalize_key(text);
    key.trim_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace())
        .to_string()
}

fn is_punctuation_only(token: &str) -> bool {
    token
        .chars()
        .all(|c| c.is_ascii_punctuation() || (!c.is_alphanumeric() && !c.is_whitespace()))
}

/// Tokens for the hardness metrics.
pub fn metric_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter(|t| !is_punctuation_only(t))
        .map(str::to_lowercase)
        .collect()
}

/// 64-bit FNV-1a. Stable across platforms and toolchains, unlike `DefaultHasher`.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(PRIME))
}

/// Truncates to the first `max_tokens` whitespace tokens.
pub fn truncate_tokens(text: &str, max_tokens: usize) -> String {
    text.split_whitespace().take(max_tokens).collect::<Vec<_>>().join(" ")
}
