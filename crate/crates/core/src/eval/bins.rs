use serde::{Deserialize, Serialize};

use crate::curator::ProbeQuery;
use crate::error::{ProbeError, Result};

/// Character-length bin `[lower, upper)`; the last bin is open-ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthBin {
    pub lower: usize,
    pub upper: Option<usize>,
    pub count: usize,
    pub hits: usize,
    /// `None` for an empty bin.
    pub acc: Option<f64>,
}

/// Bins queries by the character length of their shortest gold answer.
///
/// `edges = [e0, e1, ..]` gives bins `[0, e0), [e0, e1), .., [e_last, ∞)`.
pub fn bin_by_answer_length(queries: &[ProbeQuery], hits: &[bool], bin_edges: &[usize]) -> Result<Vec<LengthBin>> {
    if bin_edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ProbeError::Config("bin edges must be strictly increasing".into()));
    }
    if queries.len() != hits.len() {
        return Err(ProbeError::Precondition("one hit flag per query required".into()));
    }
    let mut bins: Vec<LengthBin> = std::iter::once(0)
        .chain(bin_edges.iter().copied())
        .enumerate()
        .map(|(i, lower)| LengthBin {
            lower,
            upper: bin_edges.get(i).copied(),
            count: 0,
            hits: 0,
            acc: None,
        })
        .collect();
    for (q, &hit) in queries.iter().zip(hits) {
        let len = q.answers.iter().map(|a| a.chars().count()).min().unwrap_or(0);
        let b = bin_edges.partition_point(|&e| e <= len);
        bins[b].count += 1;
        bins[b].hits += usize::from(hit);
    }
    for b in &mut bins {
        if b.count > 0 {
            b.acc = Some(b.hits as f64 / b.count as f64);
        }
    }
    Ok(bins)
}
