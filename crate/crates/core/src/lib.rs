//! Paragraph-level revision diffing, review-comment to edit alignment, and
//! evaluation of alignment predictions.

pub mod bm25;
pub mod corpus;
pub mod diff;
pub mod eval;
pub mod labels;
pub mod pipeline;
pub mod revision;
pub mod silver;
pub mod text;
