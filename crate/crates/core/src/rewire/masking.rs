use serde::{Deserialize, Serialize};

/// A self-supervised training pair: the sentence with its tail replaced by
/// the mask placeholder, and the removed tail words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedPair {
    pub query: String,
    pub answer: String,
}

fn is_final_punct(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Masks the last `max(1, floor(w * mask_ratio))` of the `w` content words.
///
/// Sentence-final punctuation is never masked and is reattached after the
/// placeholder the way it appeared originally (`infections.` yields
/// `[MASK].`, a standalone `.` yields `[MASK] .`). Returns `None` for
/// sentences with fewer than two content words.
pub fn tail_mask(sentence: &str, mask_ratio: f64, mask_placeholder: &str) -> Option<MaskedPair> {
    let mut words: Vec<&str> = sentence.split_whitespace().collect();
    let mut ending = String::new();
    if let Some(last) = words.last().copied() {
        if !last.is_empty() && last.chars().all(is_final_punct) {
            ending = format!(" {last}");
            words.pop();
        } else if last.ends_with(is_final_punct) {
            let stem = last.trim_end_matches(is_final_punct);
            if !stem.is_empty() {
                ending = last[stem.len()..].to_string();
                *words.last_mut().expect("non-empty") = stem;
            }
        }
    }
    let w = words.len();
    if w < 2 {
        return None;
    }
    let m = ((w as f64 * mask_ratio).floor() as usize).clamp(1, w - 1);
    let (prefix, tail) = words.split_at(w - m);
    Some(MaskedPair {
        query: format!("{} {mask_placeholder}{ending}", prefix.join(" ")),
        answer: tail.join(" "),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_rule_on_the_social_distancing_sentence() {
        // w = 5, ratio 0.5 → floor(2.5) = 2 words masked.
        let p = tail_mask(
            "Social-distancing largely reduces coronavirus infections.",
            0.5,
            "[MASK]",
        )
        .unwrap();
        assert_eq!(p.query, "Social-distancing largely reduces [MASK].");
        assert_eq!(p.answer, "coronavirus infections");
    }

    #[test]
    fn two_words_masks_last() {
        let p = tail_mask("Aspirin works .", 0.1, "[MASK]").unwrap();
        assert_eq!(p.query, "Aspirin [MASK] .");
        assert_eq!(p.answer, "works");
        let p = tail_mask("Aspirin works", 0.9, "[MASK]").unwrap();
        assert_eq!(p.answer, "works");
    }

    #[test]
    fn seven_words_ratio_point_four() {
        let p = tail_mask("a b c d e f g", 0.4, "[MASK]").unwrap();
        assert_eq!(p.answer, "f g");
        assert_eq!(p.query, "a b c d e [MASK]");
    }

    #[test]
    fn too_short_is_skipped() {
        assert!(tail_mask("Hello.", 0.5, "[MASK]").is_none());
        assert!(tail_mask(" . ", 0.5, "[MASK]").is_none());
    }
}
