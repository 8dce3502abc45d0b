use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ProbeError, Result};

pub const MAX_GOLD_ANSWERS: usize = 10;

/// A prompt-instantiated cloze query with its gold answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeQuery {
    pub query_id: String,
    pub relation_id: String,
    pub head_name: String,
    pub query_text: String,
    pub answers: Vec<String>,
    pub hard: bool,
}

impl ProbeQuery {
    pub fn validate(&self, mask_placeholder: &str) -> std::result::Result<(), String> {
        if self.answers.is_empty() || self.answers.len() > MAX_GOLD_ANSWERS {
            return Err(format!(
                "query {} has {} answers, expected 1..={MAX_GOLD_ANSWERS}",
                self.query_id,
                self.answers.len()
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for a in &self.answers {
            if !seen.insert(crate::text::normalize_key(a)) {
                return Err(format!("query {} has duplicate answer {a:?}", self.query_id));
            }
        }
        let masks = self.query_text.matches(mask_placeholder).count();
        if masks != 1 {
            return Err(format!(
                "query {} must contain {mask_placeholder} exactly once, found {masks}",
                self.query_id
            ));
        }
        Ok(())
    }
}

/// Writes one JSON object per line.
pub fn write_dataset<W: Write>(mut w: W, queries: &[ProbeQuery]) -> Result<()> {
    for q in queries {
        serde_json::to_writer(&mut w, q)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_dataset(queries: &[ProbeQuery], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_dataset(std::io::BufWriter::new(file), queries)
}

/// Parses JSONL. Blank lines are skipped; an empty input is an empty dataset.
pub fn read_dataset<R: BufRead>(reader: R, path: &Path) -> Result<Vec<ProbeQuery>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| ProbeError::input(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let query: ProbeQuery = serde_json::from_str(&line).map_err(|e| ProbeError::Schema {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        if query.answers.is_empty() || query.answers.len() > MAX_GOLD_ANSWERS {
            return Err(ProbeError::Schema {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("answers must hold 1..={MAX_GOLD_ANSWERS} entries"),
            });
        }
        out.push(query);
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<Vec<ProbeQuery>> {
    let file = std::fs::File::open(path).map_err(|e| ProbeError::input(path, e))?;
    read_dataset(std::io::BufReader::new(file), path)
}
