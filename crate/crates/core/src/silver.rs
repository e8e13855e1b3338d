//! Silver comment-edit alignments mined from author responses.
//!
//! Authors often quote a review comment verbatim in their response and then
//! describe the change they made, frequently reusing the wording of the edit
//! itself. A response line that nearly equals a contiguous span of a review
//! becomes a comment, and the response text that follows it is linked to
//! every edit whose changed text shares enough bigrams with it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::labels::{AlignmentLabel, Provenance, ReviewComment};
use crate::revision::Edit;
use crate::text::{bigram_overlap, containment, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReplyTarget {
    /// Added and deleted tokens of the edit.
    #[default]
    ChangedText,
    /// The whole post-revision paragraph (the source paragraph for deletions).
    FullText,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SilverConfig {
    pub min_quote_chars: usize,
    pub max_quote_distance: f64,
    /// Candidate review spans are within this fraction of the line length.
    pub window_tolerance: f64,
    pub min_reply_overlap: f64,
    pub reply_target: ReplyTarget,
}

impl Default for SilverConfig {
    fn default() -> Self {
        SilverConfig {
            min_quote_chars: 40,
            max_quote_distance: 0.10,
            window_tolerance: 0.20,
            min_reply_overlap: 0.25,
            reply_target: ReplyTarget::ChangedText,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: String,
    pub doc_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorResponse {
    pub response_id: String,
    pub doc_id: String,
    pub lines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteMatch {
    pub response_line_index: usize,
    /// Index of the matched review among those searched.
    pub review_index: usize,
    /// Character offsets `[start, end)` into the review text.
    pub review_span: (usize, usize),
    pub distance: f64,
    pub reply_block: String,
}

/// Removes forum quoting markers (`>`, `>>`, `Q:`, `Q3.`) and wrapping quote
/// characters from a response line.
pub fn strip_quote_markers(line: &str) -> &str {
    let mut s = line.trim();
    loop {
        let before = s;
        s = s.trim_start_matches('>').trim_start();
        if let Some(rest) = s.strip_prefix(['Q', 'q']) {
            let rest = rest.trim_start_matches(|c: char| c.is_ascii_digit());
            if let Some(rest) = rest.strip_prefix([':', '.', ')']) {
                s = rest.trim_start();
            }
        }
        if s == before {
            break;
        }
    }
    let quotes = ['"', '\u{201c}', '\u{201d}', '\''];
    if let (Some(first), Some(last)) = (s.chars().next(), s.chars().last()) {
        if s.chars().count() >= 2 && quotes.contains(&first) && quotes.contains(&last) {
            s = s[first.len_utf8()..s.len() - last.len_utf8()].trim();
        }
    }
    s
}

fn normalize_chars(text: &str) -> Vec<char> {
    text.chars()
        .map(|c| if c.is_whitespace() { ' ' } else { c })
        .collect()
}

/// Best-matching review span for a quote: `(start, end, normalized distance)`.
///
/// Candidate spans have a length within `tolerance` of the quote's length
/// and at least `min_len` characters. Ties prefer the earliest, then the
/// shortest span.
pub fn best_span(
    pattern: &[char],
    review: &[char],
    min_len: usize,
    max_distance: f64,
    tolerance: f64,
) -> Option<(usize, usize, f64)> {
    let n = pattern.len();
    if n == 0 || review.is_empty() {
        return None;
    }
    let lo = ((n as f64 * (1.0 - tolerance)).ceil() as usize)
        .max(min_len)
        .max(1);
    let hi = ((n as f64 * (1.0 + tolerance)).floor() as usize).min(review.len());
    if lo > hi {
        return None;
    }
    let bound = (max_distance * hi.max(n) as f64).floor() as usize;

    // Free-start DP: best[e] = min distance of the pattern to a span ending at e.
    let mut col: Vec<usize> = (0..=n).collect();
    let mut ends = Vec::new();
    for (e, &rc) in review.iter().enumerate() {
        let mut diag = col[0];
        col[0] = 0;
        for i in 1..=n {
            let up = col[i];
            col[i] = (diag + usize::from(pattern[i - 1] != rc))
                .min(up + 1)
                .min(col[i - 1] + 1);
            diag = up;
        }
        if col[n] <= bound && e + 1 >= lo {
            ends.push(e + 1);
        }
    }

    let rev_pattern: Vec<char> = pattern.iter().rev().copied().collect();
    let mut best: Option<(usize, usize, f64)> = None;
    for end in ends {
        let width = hi.min(end);
        let rev_text: Vec<char> = review[end - width..end].iter().rev().copied().collect();
        // row[k] = distance of the pattern to review[end-k..end]
        let mut row: Vec<usize> = (0..=width).collect();
        for (i, &pc) in rev_pattern.iter().enumerate() {
            let mut diag = row[0];
            row[0] = i + 1;
            for k in 1..=width {
                let up = row[k];
                row[k] = (diag + usize::from(pc != rev_text[k - 1]))
                    .min(up + 1)
                    .min(row[k - 1] + 1);
                diag = up;
            }
        }
        for (k, &d) in row.iter().enumerate().take(width + 1).skip(lo) {
            let dist = d as f64 / k.max(n) as f64;
            if dist > max_distance {
                continue;
            }
            let start = end - k;
            let better = match best {
                None => true,
                Some((bs, be, bd)) => {
                    dist < bd || (dist == bd && (start < bs || (start == bs && end < be)))
                }
            };
            if better {
                best = Some((start, end, dist));
            }
        }
    }
    best
}

/// Finds quoted review spans in a response, searching every review given.
pub fn detect_quotes_in_reviews(
    reviews: &[&str],
    response: &AuthorResponse,
    config: &SilverConfig,
) -> Vec<QuoteMatch> {
    let review_chars: Vec<Vec<char>> = reviews.iter().map(|r| normalize_chars(r)).collect();
    let mut hits: Vec<(usize, usize, (usize, usize), f64)> = Vec::new();
    for (li, line) in response.lines.iter().enumerate() {
        let quote = normalize_chars(strip_quote_markers(line));
        if quote.len() < config.min_quote_chars {
            continue;
        }
        let mut best: Option<(usize, (usize, usize), f64)> = None;
        for (ri, rc) in review_chars.iter().enumerate() {
            if let Some((s, e, d)) = best_span(
                &quote,
                rc,
                config.min_quote_chars,
                config.max_quote_distance,
                config.window_tolerance,
            ) {
                if best.is_none_or(|(_, _, bd)| d < bd) {
                    best = Some((ri, (s, e), d));
                }
            }
        }
        if let Some((ri, span, d)) = best {
            hits.push((li, ri, span, d));
        }
    }
    hits.iter()
        .enumerate()
        .map(|(k, &(li, ri, span, d))| {
            let stop = hits.get(k + 1).map_or(response.lines.len(), |h| h.0);
            QuoteMatch {
                response_line_index: li,
                review_index: ri,
                review_span: span,
                distance: d,
                reply_block: response.lines[li + 1..stop].join("\n"),
            }
        })
        .collect()
}

pub fn detect_quotes(
    review_text: &str,
    response: &AuthorResponse,
    config: &SilverConfig,
) -> Vec<QuoteMatch> {
    detect_quotes_in_reviews(&[review_text], response, config)
}

/// Bigram overlap between a reply and the part of an edit it is compared to.
pub fn reply_edit_overlap(reply: &str, edit: &Edit, target: ReplyTarget) -> f64 {
    let reply_tokens = tokenize(reply);
    match target {
        ReplyTarget::FullText => bigram_overlap(&reply_tokens, &tokenize(edit.text())).value(),
        ReplyTarget::ChangedText => {
            let spans: Vec<_> = edit.diff().changed_spans().map(|s| tokenize(&s)).collect();
            let joined = spans
                .iter()
                .fold(crate::text::TokenSequence::default(), |acc, s| {
                    acc.concat(s)
                });
            if !reply_tokens.is_empty() && reply_tokens == joined {
                return 1.0;
            }
            let changed: std::collections::HashSet<(&str, &str)> =
                spans.iter().flat_map(|s| s.bigrams()).collect();
            let reply_bigrams = reply_tokens.bigrams();
            if changed.is_empty() || reply_bigrams.is_empty() {
                return 0.0;
            }
            containment(&reply_bigrams, &changed)
        }
    }
}

/// Edits whose overlap with the reply reaches the threshold, with the overlap.
pub fn link_reply_scored(reply: &str, edits: &[Edit], config: &SilverConfig) -> Vec<(usize, f64)> {
    edits
        .iter()
        .filter_map(|e| {
            let ov = reply_edit_overlap(reply, e, config.reply_target);
            (ov >= config.min_reply_overlap).then_some((e.edit_id, ov))
        })
        .collect()
}

pub fn link_reply_to_edits(reply: &str, edits: &[Edit], config: &SilverConfig) -> Vec<usize> {
    link_reply_scored(reply, edits, config)
        .into_iter()
        .map(|(id, _)| id)
        .collect()
}

/// Everything known about one paper.
#[derive(Debug, Clone, Default)]
pub struct PaperBundle {
    pub doc_id: String,
    pub reviews: Vec<Review>,
    pub responses: Vec<AuthorResponse>,
    pub edits: Vec<Edit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SilverDiagnostics {
    pub papers: usize,
    pub papers_with_alignments: usize,
    pub quotes_found: usize,
    pub comments_emitted: usize,
    pub unlinked_comments: usize,
    pub labels_emitted: usize,
    pub aligned_edits: usize,
    /// Skipped records by reason.
    pub skipped: BTreeMap<String, usize>,
}

impl SilverDiagnostics {
    fn skip(&mut self, reason: &str) {
        *self.skipped.entry(reason.to_owned()).or_default() += 1;
    }

    fn absorb(&mut self, other: SilverDiagnostics) {
        self.papers += other.papers;
        self.papers_with_alignments += other.papers_with_alignments;
        self.quotes_found += other.quotes_found;
        self.comments_emitted += other.comments_emitted;
        self.unlinked_comments += other.unlinked_comments;
        self.labels_emitted += other.labels_emitted;
        self.aligned_edits += other.aligned_edits;
        for (k, v) in other.skipped {
            *self.skipped.entry(k).or_default() += v;
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SilverDataset {
    /// Comments linked to at least one edit.
    pub comments: Vec<ReviewComment>,
    /// Quoted comments whose reply matched no edit.
    pub unlinked: Vec<ReviewComment>,
    pub labels: Vec<AlignmentLabel>,
    pub diagnostics: SilverDiagnostics,
}

/// A quoted comment with its linked `(edit_id, overlap)` pairs.
type LinkedComment = (ReviewComment, Vec<(usize, f64)>);

#[derive(Default)]
struct PaperSilver {
    comments: Vec<ReviewComment>,
    unlinked: Vec<ReviewComment>,
    labels: Vec<AlignmentLabel>,
    diagnostics: SilverDiagnostics,
}

fn silver_for_paper(paper: &PaperBundle, config: &SilverConfig) -> PaperSilver {
    let mut out = PaperSilver::default();
    out.diagnostics.papers = 1;
    let reviews: Vec<&Review> = paper
        .reviews
        .iter()
        .filter(|r| {
            let ok = !r.text.trim().is_empty();
            if !ok {
                out.diagnostics.skip("empty_review");
            }
            ok
        })
        .collect();
    let review_texts: Vec<&str> = reviews.iter().map(|r| r.text.as_str()).collect();

    // (review position, response position, line) -> comment, its edits
    let mut found: BTreeMap<(usize, usize, usize), LinkedComment> = BTreeMap::new();
    let mut seen_ids: HashMap<String, (usize, usize, usize)> = HashMap::new();
    for (pi, response) in paper.responses.iter().enumerate() {
        if response.lines.iter().all(|l| l.trim().is_empty()) {
            out.diagnostics.skip("empty_response");
            continue;
        }
        for q in detect_quotes_in_reviews(&review_texts, response, config) {
            out.diagnostics.quotes_found += 1;
            let review = reviews[q.review_index];
            let (s, e) = q.review_span;
            let comment_id = format!("{}#{}-{}", review.review_id, s, e);
            let links = link_reply_scored(&q.reply_block, &paper.edits, config);
            let key = *seen_ids.entry(comment_id.clone()).or_insert((
                q.review_index,
                pi,
                q.response_line_index,
            ));
            let entry = found.entry(key).or_insert_with(|| {
                let text: String = review.text.chars().skip(s).take(e - s).collect();
                (
                    ReviewComment {
                        comment_id,
                        review_id: review.review_id.clone(),
                        doc_id: paper.doc_id.clone(),
                        text,
                        context: None,
                    },
                    Vec::new(),
                )
            });
            for (id, ov) in links {
                match entry.1.iter_mut().find(|(eid, _)| *eid == id) {
                    Some(existing) => existing.1 = existing.1.max(ov),
                    None => entry.1.push((id, ov)),
                }
            }
        }
    }

    let mut aligned = BTreeSet::new();
    for (_, (comment, mut links)) in found {
        if links.is_empty() {
            out.diagnostics.unlinked_comments += 1;
            out.unlinked.push(comment);
            continue;
        }
        links.sort_by_key(|(id, _)| *id);
        for (edit_id, ov) in links {
            aligned.insert(edit_id);
            out.labels.push(AlignmentLabel {
                comment_id: comment.comment_id.clone(),
                doc_id: paper.doc_id.clone(),
                edit_id,
                label: true,
                score: Some(ov),
                provenance: Provenance::Silver,
            });
        }
        out.comments.push(comment);
    }
    out.diagnostics.comments_emitted = out.comments.len();
    out.diagnostics.labels_emitted = out.labels.len();
    out.diagnostics.aligned_edits = aligned.len();
    out.diagnostics.papers_with_alignments = usize::from(!out.comments.is_empty());
    out
}

/// Runs quote detection and reply linking over every paper, in `doc_id`
/// order. Papers are processed in parallel on the current rayon pool.
pub fn build_silver_dataset(papers: &[PaperBundle], config: &SilverConfig) -> SilverDataset {
    let mut order: Vec<&PaperBundle> = papers.iter().collect();
    order.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    let per_paper: Vec<PaperSilver> = order
        .par_iter()
        .map(|p| silver_for_paper(p, config))
        .collect();
    let mut ds = SilverDataset::default();
    for p in per_paper {
        ds.comments.extend(p.comments);
        ds.unlinked.extend(p.unlinked);
        ds.labels.extend(p.labels);
        ds.diagnostics.absorb(p.diagnostics);
    }
    ds
}
