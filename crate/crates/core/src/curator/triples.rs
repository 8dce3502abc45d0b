use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ProbeError, Result};

/// One `<head, relation, tail>` fact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeTriple {
    pub head_name: String,
    pub relation_id: String,
    pub tail_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_id: Option<String>,
}

impl KnowledgeTriple {
    pub fn new(head: &str, relation: &str, tail: &str) -> Self {
        KnowledgeTriple {
            head_name: head.trim().to_string(),
            relation_id: relation.trim().to_string(),
            tail_name: tail.trim().to_string(),
            head_id: None,
            tail_id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedLine {
    pub line: usize,
    pub reason: String,
}

/// Well-formed triples in input order plus every rejected line.
#[derive(Debug, Clone, Default)]
pub struct TripleLoad {
    pub triples: Vec<KnowledgeTriple>,
    pub malformed: Vec<MalformedLine>,
}

fn parse_line(line: &str) -> std::result::Result<KnowledgeTriple, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() < 3 {
        return Err(format!(
            "expected at least 3 tab-separated fields, found {}",
            fields.len()
        ));
    }
    if fields.len() > 5 {
        return Err(format!(
            "expected at most 5 tab-separated fields, found {}",
            fields.len()
        ));
    }
    let mut triple = KnowledgeTriple::new(fields[0], fields[1], fields[2]);
    if triple.head_name.is_empty() || triple.tail_name.is_empty() {
        return Err("empty head or tail".to_string());
    }
    if triple.relation_id.is_empty() {
        return Err("empty relation".to_string());
    }
    let optional = |s: Option<&&str>| s.map(|v| v.trim().to_string()).filter(|v| !v.is_empty());
    triple.head_id = optional(fields.get(3));
    triple.tail_id = optional(fields.get(4));
    Ok(triple)
}

/// Reads a tab-separated triple dump.
///
/// Blank lines and lines starting with `#` are ignored. Lines that do not
/// parse are collected in [`TripleLoad::malformed`]. Zero valid triples is an
/// error.
pub fn load_triples<R: BufRead>(reader: R, source_name: &str) -> Result<TripleLoad> {
    let mut out = TripleLoad::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| ProbeError::input(source_name, e))?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        match parse_line(trimmed) {
            Ok(t) => out.triples.push(t),
            Err(reason) => out.malformed.push(MalformedLine { line: idx + 1, reason }),
        }
    }
    if out.triples.is_empty() {
        return Err(ProbeError::EmptyDataset {
            what: source_name.to_string(),
            malformed: out.malformed.len(),
        });
    }
    Ok(out)
}

pub fn load_triples_file(path: &Path) -> Result<TripleLoad> {
    let file = std::fs::File::open(path).map_err(|e| ProbeError::input(path, e))?;
    load_triples(std::io::BufReader::new(file), &path.display().to_string())
}
