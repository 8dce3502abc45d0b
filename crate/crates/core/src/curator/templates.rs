use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ProbeError, Result};

const BUNDLED_TEMPLATES: &str = include_str!("../../data/templates.json");

pub const SUBJECT_SLOT: &str = "[X]";
pub const OBJECT_SLOT: &str = "[Y]";

/// A manual cloze prompt for one relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub relation_id: String,
    pub pattern: String,
    pub display_name: String,
}

impl PromptTemplate {
    pub fn new(
        relation_id: impl Into<String>,
        pattern: impl Into<String>,
        display_name: impl Into<String>,
    ) -> Result<Self> {
        let template = PromptTemplate {
            relation_id: relation_id.into(),
            pattern: pattern.into(),
            display_name: display_name.into(),
        };
        template.validate()?;
        Ok(template)
    }

    pub fn validate(&self) -> Result<()> {
        for slot in [SUBJECT_SLOT, OBJECT_SLOT] {
            let n = self.pattern.matches(slot).count();
            if n != 1 {
                return Err(ProbeError::Config(format!(
                    "template for {:?} must contain {slot} exactly once, found {n}",
                    self.relation_id
                )));
            }
        }
        Ok(())
    }

    /// Fills the template.
    ///
    /// Substitution order: the slots are located in the *pattern* first, then
    /// `[X]` is replaced by `head_name` and the pattern's own `[Y]` by
    /// `mask_placeholder`. Text inside `head_name` is never re-scanned, so a
    /// head that literally contains `[Y]` keeps it.
    pub fn instantiate(&self, head_name: &str, mask_placeholder: &str) -> String {
        let x = self.pattern.find(SUBJECT_SLOT).expect("validated template");
        let y = self.pattern.find(OBJECT_SLOT).expect("validated template");
        let mut out = String::with_capacity(self.pattern.len() + head_name.len());
        let (first, first_fill, second, second_fill) = if x < y {
            (x, head_name, y, mask_placeholder)
        } else {
            (y, mask_placeholder, x, head_name)
        };
        out.push_str(&self.pattern[..first]);
        out.push_str(first_fill);
        out.push_str(&self.pattern[first + 3..second]);
        out.push_str(second_fill);
        out.push_str(&self.pattern[second + 3..]);
        out
    }
}

pub fn instantiate_prompt(template: &PromptTemplate, head_name: &str, mask_placeholder: &str) -> String {
    template.instantiate(head_name, mask_placeholder)
}

/// Relation id → template.
#[derive(Debug, Clone, Default)]
pub struct TemplateRegistry {
    templates: BTreeMap<String, PromptTemplate>,
}

impl TemplateRegistry {
    pub fn from_templates(templates: Vec<PromptTemplate>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for t in templates {
            t.validate()?;
            if map.contains_key(&t.relation_id) {
                return Err(ProbeError::Config(format!(
                    "duplicate template for relation {:?}",
                    t.relation_id
                )));
            }
            map.insert(t.relation_id.clone(), t);
        }
        Ok(TemplateRegistry { templates: map })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let templates: Vec<PromptTemplate> = serde_json::from_str(json)?;
        Self::from_templates(templates)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path).map_err(|e| ProbeError::input(path, e))?;
        Self::from_json(&json)
    }

    /// The nineteen manual prompts shipped with the toolkit.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_TEMPLATES).expect("bundled templates are valid")
    }

    pub fn get(&self, relation_id: &str) -> Option<&PromptTemplate> {
        self.templates.get(relation_id)
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PromptTemplate> {
        self.templates.values()
    }
}
