//! Token-level LCS diff between paragraph versions and the bracketed
//! `[+ added +]` / `[- deleted -]` markup.
//!
//! Diff tokens are whitespace-delimited and keep their original case and
//! punctuation, so a rendered diff shows the text as the author wrote it.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanKind {
    Kept,
    Added,
    Deleted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffSpan {
    pub kind: SpanKind,
    pub tokens: Vec<String>,
}

/// An edit script as maximal runs of kept, added and deleted tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenDiff {
    pub spans: Vec<DiffSpan>,
}

impl TokenDiff {
    fn push(&mut self, kind: SpanKind, token: &str) {
        match self.spans.last_mut() {
            Some(last) if last.kind == kind => last.tokens.push(token.to_owned()),
            _ => self.spans.push(DiffSpan {
                kind,
                tokens: vec![token.to_owned()],
            }),
        }
    }

    fn count(&self, kind: SpanKind) -> usize {
        self.spans
            .iter()
            .filter(|s| s.kind == kind)
            .map(|s| s.tokens.len())
            .sum()
    }

    pub fn tokens_added(&self) -> usize {
        self.count(SpanKind::Added)
    }

    pub fn tokens_deleted(&self) -> usize {
        self.count(SpanKind::Deleted)
    }

    /// Tokens of the spans of the given kinds, in order.
    pub fn side(&self, kinds: &[SpanKind]) -> Vec<&str> {
        self.spans
            .iter()
            .filter(|s| kinds.contains(&s.kind))
            .flat_map(|s| s.tokens.iter().map(String::as_str))
            .collect()
    }

    /// Text of each added or deleted span, one string per span.
    pub fn changed_spans(&self) -> impl Iterator<Item = String> + '_ {
        self.spans
            .iter()
            .filter(|s| s.kind != SpanKind::Kept)
            .map(|s| s.tokens.join(" "))
    }

    /// Renders the diff with inline `[+ +]` and `[- -]` markup.
    pub fn render(&self) -> String {
        let parts: Vec<String> = self
            .spans
            .iter()
            .map(|s| {
                let body = s.tokens.join(" ");
                match s.kind {
                    SpanKind::Kept => body,
                    SpanKind::Added => format!("[+ {body} +]"),
                    SpanKind::Deleted => format!("[- {body} -]"),
                }
            })
            .collect();
        parts.join(" ")
    }
}

/// Minimal token edit script from `source` to `target`.
///
/// Among the minimal scripts, deletions are emitted before additions at each
/// point where the two texts diverge.
pub fn token_diff(source: &str, target: &str) -> TokenDiff {
    let a: Vec<&str> = source.split_whitespace().collect();
    let b: Vec<&str> = target.split_whitespace().collect();

    let prefix = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let suffix = a[prefix..]
        .iter()
        .rev()
        .zip(b[prefix..].iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    let (ma, mb) = (&a[prefix..a.len() - suffix], &b[prefix..b.len() - suffix]);

    let mut diff = TokenDiff::default();
    for t in &a[..prefix] {
        diff.push(SpanKind::Kept, t);
    }

    // lcs[i][j] = LCS length of ma[i..] and mb[j..]
    let w = mb.len() + 1;
    let mut lcs = vec![0u32; (ma.len() + 1) * w];
    for i in (0..ma.len()).rev() {
        for j in (0..mb.len()).rev() {
            lcs[i * w + j] = if ma[i] == mb[j] {
                lcs[(i + 1) * w + j + 1] + 1
            } else {
                lcs[(i + 1) * w + j].max(lcs[i * w + j + 1])
            };
        }
    }
    let (mut i, mut j) = (0, 0);
    while i < ma.len() || j < mb.len() {
        if i < ma.len() && j < mb.len() && ma[i] == mb[j] {
            diff.push(SpanKind::Kept, ma[i]);
            i += 1;
            j += 1;
        } else if i < ma.len() && (j == mb.len() || lcs[(i + 1) * w + j] >= lcs[i * w + j + 1]) {
            diff.push(SpanKind::Deleted, ma[i]);
            i += 1;
        } else {
            diff.push(SpanKind::Added, mb[j]);
            j += 1;
        }
    }

    for t in &a[a.len() - suffix..] {
        diff.push(SpanKind::Kept, t);
    }
    diff
}
