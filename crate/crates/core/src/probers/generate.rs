use super::predictions::RankedPrediction;
use crate::encoders::Generator;
use crate::error::{ProbeError, Result};

/// Generation-based probing: trimmed, deduplicated top-`k` generator outputs.
pub fn generate_probe(generator: &dyn Generator, query_id: &str, query: &str, k: usize) -> Result<RankedPrediction> {
    let raw = generator
        .generate(query, k.saturating_mul(2).max(k))
        .map_err(|e| ProbeError::Generator {
            query_id: query_id.to_string(),
            message: e.to_string(),
        })?;
    let cleaned = raw
        .into_iter()
        .map(|(s, v)| (s.trim().to_string(), v))
        .filter(|(s, _)| !s.is_empty())
        .collect();
    Ok(RankedPrediction::from_scored(query_id, "generate", cleaned, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::FixedGenerator;

    #[test]
    fn fixed_list_order_preserved() {
        let g = FixedGenerator::new([(" hepatitis b ", -0.1), ("fever", -0.4)]);
        let p = generate_probe(&g, "q1", "x [MASK] .", 10).unwrap();
        assert_eq!(p.top(10).collect::<Vec<_>>(), vec!["hepatitis b", "fever"]);
    }

    #[test]
    fn truncation_and_dedup() {
        let g = FixedGenerator::new([("a", -0.1), ("a", -0.2), ("b", -0.3), ("c", -0.4)]);
        let p = generate_probe(&g, "q1", "x [MASK] .", 2).unwrap();
        assert_eq!(p.candidates, vec![("a".to_string(), -0.1), ("b".to_string(), -0.3)]);
    }

    struct Failing;
    impl Generator for Failing {
        fn identity(&self) -> String {
            "failing".into()
        }
        fn max_new_tokens(&self) -> usize {
            1
        }
        fn generate(&self, _: &str, _: usize) -> Result<Vec<(String, f64)>> {
            Err(ProbeError::Precondition("boom".into()))
        }
    }

    #[test]
    fn failure_carries_query_id() {
        let err = generate_probe(&Failing, "q7", "x", 3).unwrap_err();
        assert!(matches!(err, ProbeError::Generator { ref query_id, .. } if query_id == "q7"));
    }
}
