use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ProbeError, Result};
use crate::text::normalize_answer;

/// Ranked candidates for one query, best first.
///
/// Scores are raw strategy scores (cosine, mean log-probability, ...).
/// A score of `-inf` is written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPrediction {
    pub query_id: String,
    pub strategy: String,
    #[serde(serialize_with = "ser_candidates", deserialize_with = "de_candidates")]
    pub candidates: Vec<(String, f64)>,
}

impl RankedPrediction {
    /// Sorts by descending score (stable, so equal scores keep input order),
    /// drops candidates whose normalized form was already seen, and keeps
    /// at most `k`.
    pub fn from_scored(
        query_id: impl Into<String>,
        strategy: impl Into<String>,
        mut scored: Vec<(String, f64)>,
        k: usize,
    ) -> Self {
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut seen = HashSet::new();
        let candidates = scored
            .into_iter()
            .filter(|(s, _)| seen.insert(normalize_answer(s)))
            .take(k)
            .collect();
        RankedPrediction {
            query_id: query_id.into(),
            strategy: strategy.into(),
            candidates,
        }
    }

    pub fn top(&self, k: usize) -> impl Iterator<Item = &str> {
        self.candidates.iter().take(k).map(|(s, _)| s.as_str())
    }
}

fn ser_candidates<S: Serializer>(c: &[(String, f64)], s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<(&str, Option<f64>)> = c
        .iter()
        .map(|(n, v)| (n.as_str(), v.is_finite().then_some(*v)))
        .collect();
    rows.serialize(s)
}

fn de_candidates<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<(String, f64)>, D::Error> {
    let rows: Vec<(String, Option<f64>)> = Vec::deserialize(d)?;
    rows.into_iter()
        .map(|(n, v)| match v {
            Some(v) if v.is_finite() => Ok((n, v)),
            Some(v) => Err(D::Error::custom(format!("non-finite score {v}"))),
            None => Ok((n, f64::NEG_INFINITY)),
        })
        .collect()
}

pub fn write_predictions<W: Write>(mut w: W, predictions: &[RankedPrediction]) -> Result<()> {
    for p in predictions {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_predictions(predictions: &[RankedPrediction], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_predictions(std::io::BufWriter::new(f), predictions)
}

pub fn read_predictions<R: BufRead>(r: R, path: &Path) -> Result<Vec<RankedPrediction>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| ProbeError::input(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| ProbeError::Schema {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn load_predictions(path: &Path) -> Result<Vec<RankedPrediction>> {
    let f = std::fs::File::open(path).map_err(|e| ProbeError::input(path, e))?;
    read_predictions(std::io::BufReader::new(f), path)
}
