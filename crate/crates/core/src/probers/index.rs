use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use ndarray::{Array2, Axis};

use crate::encoders::{Encoder, Matrix};
use crate::error::{ProbeError, Result};
use crate::text::normalize_answer;

const ENCODE_CHUNK: usize = 512;

/// Frozen, unit-normalized vectors for the whole answer vocabulary.
#[derive(Debug, Clone)]
pub struct EntityIndex {
    entity_names: Vec<String>,
    vectors: Matrix,
    encoder_identity: String,
    layer_limit: usize,
    by_name: HashMap<String, usize>,
}

impl EntityIndex {
    pub fn entity_names(&self) -> &[String] {
        &self.entity_names
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn encoder_identity(&self) -> &str {
        &self.encoder_identity
    }

    pub fn layer_limit(&self) -> usize {
        self.layer_limit
    }

    pub fn len(&self) -> usize {
        self.entity_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entity_names.is_empty()
    }

    /// Position of an entity, looked up by normalized name.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.by_name.get(&normalize_answer(name)).copied()
    }
}

pub fn build_entity_index(encoder: &dyn Encoder, entity_names: &[String], layer_limit: usize) -> Result<EntityIndex> {
    if entity_names.is_empty() {
        return Err(ProbeError::IndexBuild("entity list is empty".into()));
    }
    let mut by_name = HashMap::with_capacity(entity_names.len());
    let mut duplicates = Vec::new();
    for (i, name) in entity_names.iter().enumerate() {
        if by_name.insert(normalize_answer(name), i).is_some() {
            duplicates.push(name.clone());
        }
    }
    if !duplicates.is_empty() {
        return Err(ProbeError::IndexBuild(format!(
            "duplicate entity names after normalization: {}",
            duplicates.join(", ")
        )));
    }
    let mut vectors = Array2::<f64>::zeros((entity_names.len(), encoder.embedding_dim()));
    for (chunk_no, chunk) in entity_names.chunks(ENCODE_CHUNK).enumerate() {
        let texts: Vec<&str> = chunk.iter().map(String::as_str).collect();
        let m = encoder.encode(&texts, layer_limit)?;
        let start = chunk_no * ENCODE_CHUNK;
        vectors
            .slice_mut(ndarray::s![start..start + chunk.len(), ..])
            .assign(&m);
    }
    for (i, mut row) in vectors.axis_iter_mut(Axis(0)).enumerate() {
        let norm = row.dot(&row).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(ProbeError::IndexBuild(format!(
                "entity {:?} encodes to a zero vector",
                entity_names[i]
            )));
        }
        row /= norm;
    }
    Ok(EntityIndex {
        entity_names: entity_names.to_vec(),
        vectors,
        encoder_identity: encoder.identity(),
        layer_limit,
        by_name,
    })
}

/// Entity vocabulary file: one name per line, blank lines ignored.
pub fn load_entities(path: &Path) -> Result<Vec<String>> {
    let f = std::fs::File::open(path).map_err(|e| ProbeError::input(path, e))?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(f).lines() {
        let line = line.map_err(|e| ProbeError::input(path, e))?;
        let name = line.trim();
        if !name.is_empty() {
            out.push(name.to_string());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::ReferenceEncoder;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rows_are_unit_and_rebuild_is_identical() {
        let enc = ReferenceEncoder::with_dim_seed(16, 1).unwrap();
        let n = names(&["hepatitis b", "epistaxis", "magnesium deficiency"]);
        let a = build_entity_index(&enc, &n, 2).unwrap();
        for row in a.vectors().rows() {
            assert!((row.dot(&row).sqrt() - 1.0).abs() < 1e-6);
        }
        let b = build_entity_index(&enc, &n, 2).unwrap();
        assert_eq!(a.vectors(), b.vectors());
        assert_eq!(a.position("Epistaxis"), Some(1));
    }

    #[test]
    fn empty_and_duplicate_lists_fail() {
        let enc = ReferenceEncoder::with_dim_seed(16, 1).unwrap();
        assert!(build_entity_index(&enc, &[], 1).is_err());
        let err = build_entity_index(&enc, &names(&["Fever", "fever."]), 1).unwrap_err();
        assert!(err.to_string().contains("fever."), "{err}");
    }
}
