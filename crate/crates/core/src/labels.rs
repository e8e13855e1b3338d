//! Records shared between the labeling, ranking and evaluation stages.

use serde::{Deserialize, Serialize};

/// A span of review text asking for a change, with optional context that was
/// concatenated in front of it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewComment {
    pub comment_id: String,
    pub review_id: String,
    pub doc_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

impl ReviewComment {
    /// Context and comment joined, as fed to a scorer.
    pub fn full_text(&self) -> String {
        match &self.context {
            Some(ctx) if !ctx.is_empty() => format!("{ctx} {}", self.text),
            _ => self.text.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Gold,
    Silver,
    Predicted,
}

/// Whether an edit (identified by its paper and per-paper id) was made in
/// response to a comment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentLabel {
    pub comment_id: String,
    pub doc_id: String,
    pub edit_id: usize,
    pub label: bool,
    #[serde(default)]
    pub score: Option<f64>,
    pub provenance: Provenance,
}
