//! Paragraph alignment between two versions of a document.
//!
//! Each target paragraph is greedily matched to the source paragraph with the
//! highest locality-penalized bigram similarity. Paragraphs that a PDF parser
//! split differently in the two versions are then merged back together, and
//! the result is flattened into an ordered list of [`Edit`]s.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::diff::{token_diff, TokenDiff};
use crate::text::{bigram_overlap, jaccard, tokenize};

/// A target paragraph is only matched when its best similarity exceeds this.
pub const MATCH_THRESHOLD: f64 = 0.10;

/// Edits changing fewer tokens than this are `minor`.
pub const MINOR_EDIT_MAX_TOKENS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub index: usize,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Source,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentVersion {
    pub doc_id: String,
    pub role: Role,
    pub paragraphs: Vec<Paragraph>,
}

impl DocumentVersion {
    /// Builds a version from paragraph texts, numbering them in order.
    pub fn new<I, S>(doc_id: impl Into<String>, role: Role, texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::with_sections(doc_id, role, texts.into_iter().map(|t| (t, None)))
    }

    pub fn with_sections<I, S>(doc_id: impl Into<String>, role: Role, paragraphs: I) -> Self
    where
        I: IntoIterator<Item = (S, Option<String>)>,
        S: Into<String>,
    {
        DocumentVersion {
            doc_id: doc_id.into(),
            role,
            paragraphs: paragraphs
                .into_iter()
                .enumerate()
                .map(|(index, (text, section))| Paragraph {
                    index,
                    text: text.into(),
                    section,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.paragraphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paragraphs.is_empty()
    }

    /// Paragraphs `span` merged into one, texts joined by a single space.
    pub fn merged(&self, span: Span) -> Paragraph {
        let parts = &self.paragraphs[span.start..span.end];
        Paragraph {
            index: span.start,
            text: parts
                .iter()
                .map(|p| p.text.as_str())
                .collect::<Vec<_>>()
                .join(" "),
            section: parts[0].section.clone(),
        }
    }
}

/// Half-open range of paragraph indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn single(i: usize) -> Self {
        Span {
            start: i,
            end: i + 1,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i < self.end
    }

    pub fn is_subset_of(&self, other: &Span) -> bool {
        other.start <= self.start && self.end <= other.end
    }
}

/// Partial mapping from target paragraph index to the source paragraphs it
/// was matched with. Before merging every span has length one.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AlignmentMap {
    pub entries: BTreeMap<usize, Span>,
}

impl AlignmentMap {
    /// First source index mapped to target `j`.
    pub fn get(&self, j: usize) -> Option<usize> {
        self.entries.get(&j).map(|s| s.start)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditCategory {
    Unchanged,
    Minor,
    Major,
    Added,
    Deleted,
}

impl EditCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            EditCategory::Unchanged => "unchanged",
            EditCategory::Minor => "minor",
            EditCategory::Major => "major",
            EditCategory::Added => "added",
            EditCategory::Deleted => "deleted",
        }
    }
}

/// Categorizes an edit from which sides exist and how many tokens changed.
pub fn classify_edit(
    has_source: bool,
    has_target: bool,
    tokens_added: usize,
    tokens_deleted: usize,
) -> EditCategory {
    match (has_source, has_target) {
        (false, _) => EditCategory::Added,
        (_, false) => EditCategory::Deleted,
        _ => match tokens_added + tokens_deleted {
            0 => EditCategory::Unchanged,
            n if n < MINOR_EDIT_MAX_TOKENS => EditCategory::Minor,
            _ => EditCategory::Major,
        },
    }
}

/// A source paragraph paired with its revision. Either side (not both) may
/// be absent; merged paragraphs cover more than one index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub edit_id: usize,
    pub source: Option<Paragraph>,
    pub target: Option<Paragraph>,
    pub source_span: Option<Span>,
    pub target_span: Option<Span>,
    pub category: EditCategory,
    pub tokens_added: usize,
    pub tokens_deleted: usize,
}

impl Edit {
    pub fn source_text(&self) -> &str {
        self.source.as_ref().map_or("", |p| p.text.as_str())
    }

    pub fn target_text(&self) -> &str {
        self.target.as_ref().map_or("", |p| p.text.as_str())
    }

    /// Post-revision text, or the deleted text for deletions.
    pub fn text(&self) -> &str {
        match &self.target {
            Some(p) => &p.text,
            None => self.source_text(),
        }
    }

    pub fn diff(&self) -> TokenDiff {
        token_diff(self.source_text(), self.target_text())
    }

    /// Inline diff markup for this edit.
    pub fn render(&self) -> String {
        self.diff().render()
    }

    fn build(
        edit_id: usize,
        source: Option<Paragraph>,
        target: Option<Paragraph>,
        source_span: Option<Span>,
        target_span: Option<Span>,
    ) -> Edit {
        let d = token_diff(
            source.as_ref().map_or("", |p| &p.text),
            target.as_ref().map_or("", |p| &p.text),
        );
        let (tokens_added, tokens_deleted) = (d.tokens_added(), d.tokens_deleted());
        Edit {
            edit_id,
            category: classify_edit(
                source.is_some(),
                target.is_some(),
                tokens_added,
                tokens_deleted,
            ),
            source,
            target,
            source_span,
            target_span,
            tokens_added,
            tokens_deleted,
        }
    }
}

pub fn render_diff(edit: &Edit) -> String {
    edit.render()
}

/// Locality-penalized similarity between source paragraph `i` and target
/// paragraph `j`, given the source index the previous target was matched to.
pub fn similarity(
    i: usize,
    j: usize,
    prev_match: Option<usize>,
    source: &DocumentVersion,
    target: &DocumentVersion,
) -> f64 {
    let overlap = bigram_overlap(
        &tokenize(&source.paragraphs[i].text),
        &tokenize(&target.paragraphs[j].text),
    )
    .value();
    overlap - locality_penalty(i, prev_match, source.len())
}

fn locality_penalty(i: usize, prev_match: Option<usize>, n_source: usize) -> f64 {
    let expected = prev_match.map_or(0, |p| p + 1);
    expected.abs_diff(i) as f64 / n_source as f64
}

/// Paragraph tokens interned to integer ids for one document pair.
struct Prepared {
    source: Vec<Vec<u32>>,
    target: Vec<Vec<u32>>,
}

impl Prepared {
    fn new(source: &DocumentVersion, target: &DocumentVersion) -> Self {
        let mut vocab: HashMap<String, u32> = HashMap::new();
        let mut intern = |doc: &DocumentVersion| -> Vec<Vec<u32>> {
            doc.paragraphs
                .iter()
                .map(|p| {
                    Vec::from(tokenize(&p.text))
                        .into_iter()
                        .map(|t| {
                            let next = vocab.len() as u32;
                            *vocab.entry(t).or_insert(next)
                        })
                        .collect()
                })
                .collect()
        };
        let source_ids = intern(source);
        let target_ids = intern(target);
        Prepared {
            source: source_ids,
            target: target_ids,
        }
    }

    fn span_tokens(paras: &[Vec<u32>], span: Span) -> Vec<u32> {
        paras[span.start..span.end]
            .iter()
            .flatten()
            .copied()
            .collect()
    }
}

fn bigram_set(tokens: &[u32]) -> HashSet<u64> {
    tokens
        .windows(2)
        .map(|w| (u64::from(w[0]) << 32) | u64::from(w[1]))
        .collect()
}

/// Containment overlap with the identical-sequence rule of [`bigram_overlap`].
fn overlap_ids(a: &[u32], ba: &HashSet<u64>, b: &[u32], bb: &HashSet<u64>) -> f64 {
    if !a.is_empty() && a == b {
        return 1.0;
    }
    if ba.is_empty() || bb.is_empty() {
        return 0.0;
    }
    let (small, large) = if ba.len() <= bb.len() {
        (ba, bb)
    } else {
        (bb, ba)
    };
    let inter = small.iter().filter(|x| large.contains(x)).count();
    inter as f64 / small.len() as f64
}

/// (containment, jaccard) of two token sequences' bigram sets.
fn pair_scores(a: &[u32], b: &[u32]) -> (f64, f64) {
    if !a.is_empty() && a == b {
        return (1.0, 1.0);
    }
    let (ba, bb) = (bigram_set(a), bigram_set(b));
    (overlap_ids(a, &ba, b, &bb), jaccard(&ba, &bb))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Group {
    src: Span,
    tgt: Span,
}

fn greedy_map(prep: &Prepared) -> Vec<Option<usize>> {
    let n_src = prep.source.len();
    let src_bigrams: Vec<HashSet<u64>> = prep.source.iter().map(|t| bigram_set(t)).collect();
    let mut postings: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, set) in src_bigrams.iter().enumerate() {
        for &bg in set {
            postings.entry(bg).or_default().push(i);
        }
    }
    let mut by_tokens: HashMap<&[u32], Vec<usize>> = HashMap::new();
    for (i, toks) in prep.source.iter().enumerate() {
        if !toks.is_empty() {
            by_tokens.entry(toks.as_slice()).or_default().push(i);
        }
    }

    let mut prev: Option<usize> = None;
    let mut mapping = Vec::with_capacity(prep.target.len());
    for toks in &prep.target {
        let tb = bigram_set(toks);
        // Only sources sharing a bigram (or the whole sequence) can beat the threshold.
        let mut candidates: Vec<usize> = tb
            .iter()
            .filter_map(|bg| postings.get(bg))
            .flatten()
            .copied()
            .chain(
                by_tokens
                    .get(toks.as_slice())
                    .into_iter()
                    .flatten()
                    .copied(),
            )
            .collect();
        candidates.sort_unstable();
        candidates.dedup();

        let mut best: Option<(usize, f64)> = None;
        for i in candidates {
            let sim = overlap_ids(&prep.source[i], &src_bigrams[i], toks, &tb)
                - locality_penalty(i, prev, n_src);
            if best.is_none_or(|(_, b)| sim > b) {
                best = Some((i, sim));
            }
        }
        match best {
            Some((i, sim)) if sim > MATCH_THRESHOLD => {
                mapping.push(Some(i));
                prev = Some(i);
            }
            _ => mapping.push(None),
        }
    }
    mapping
}

#[derive(Debug, Clone, Copy)]
enum Extension {
    SourceLeft,
    SourceRight,
    TargetLeft,
    TargetRight,
}

const EXTENSIONS: [Extension; 4] = [
    Extension::SourceLeft,
    Extension::SourceRight,
    Extension::TargetLeft,
    Extension::TargetRight,
];

/// Proposed extension of group `g`: the grown group, and the index of a
/// group that the absorbed target paragraph belonged to, if any.
fn propose(
    groups: &[Group],
    g: usize,
    ext: Extension,
    n_src: usize,
    n_tgt: usize,
) -> Option<(Group, Option<usize>)> {
    let cur = groups[g];
    let source_free = |x: usize| groups.iter().all(|o| !o.src.contains(x));
    let target_owner = |y: usize| -> Result<Option<usize>, ()> {
        match groups.iter().position(|o| o.tgt.contains(y)) {
            None => Ok(None),
            Some(k)
                if k != g && groups[k].tgt.len() == 1 && groups[k].src.is_subset_of(&cur.src) =>
            {
                Ok(Some(k))
            }
            Some(_) => Err(()),
        }
    };
    match ext {
        Extension::SourceLeft => {
            let x = cur.src.start.checked_sub(1)?;
            source_free(x).then_some((
                Group {
                    src: Span {
                        start: x,
                        end: cur.src.end,
                    },
                    tgt: cur.tgt,
                },
                None,
            ))
        }
        Extension::SourceRight => {
            let x = cur.src.end;
            (x < n_src && source_free(x)).then_some((
                Group {
                    src: Span {
                        start: cur.src.start,
                        end: x + 1,
                    },
                    tgt: cur.tgt,
                },
                None,
            ))
        }
        Extension::TargetLeft => {
            let y = cur.tgt.start.checked_sub(1)?;
            let owner = target_owner(y).ok()?;
            Some((
                Group {
                    src: cur.src,
                    tgt: Span {
                        start: y,
                        end: cur.tgt.end,
                    },
                },
                owner,
            ))
        }
        Extension::TargetRight => {
            let y = cur.tgt.end;
            if y >= n_tgt {
                return None;
            }
            let owner = target_owner(y).ok()?;
            Some((
                Group {
                    src: cur.src,
                    tgt: Span {
                        start: cur.tgt.start,
                        end: y + 1,
                    },
                },
                owner,
            ))
        }
    }
}

/// One pass of merge attempts over all groups; returns whether anything merged.
fn merge_pass(groups: &mut Vec<Group>, prep: &Prepared) -> bool {
    let (n_src, n_tgt) = (prep.source.len(), prep.target.len());
    let mut changed = false;
    let mut g = 0;
    while g < groups.len() {
        let cur = groups[g];
        let (base_overlap, base_jaccard) = pair_scores(
            &Prepared::span_tokens(&prep.source, cur.src),
            &Prepared::span_tokens(&prep.target, cur.tgt),
        );
        let mut best: Option<(Group, Option<usize>, f64)> = None;
        for ext in EXTENSIONS {
            let Some((grown, absorbed)) = propose(groups, g, ext, n_src, n_tgt) else {
                continue;
            };
            let (overlap, jac) = pair_scores(
                &Prepared::span_tokens(&prep.source, grown.src),
                &Prepared::span_tokens(&prep.target, grown.tgt),
            );
            let improves = overlap >= base_overlap && jac > base_jaccard;
            if improves && best.as_ref().is_none_or(|b| jac > b.2) {
                best = Some((grown, absorbed, jac));
            }
        }
        if let Some((grown, absorbed, _)) = best {
            groups[g] = grown;
            changed = true;
            if let Some(k) = absorbed {
                groups.remove(k);
                if k < g {
                    g -= 1;
                }
            }
        }
        g += 1;
    }
    changed
}

fn build_map(groups: &[Group]) -> AlignmentMap {
    let mut entries = BTreeMap::new();
    for gr in groups {
        for j in gr.tgt.start..gr.tgt.end {
            entries.insert(j, gr.src);
        }
    }
    AlignmentMap { entries }
}

/// Flattens groups into edits in target order, each deletion placed before
/// the first later item that is matched to a higher source position.
fn build_edits(groups: &[Group], source: &DocumentVersion, target: &DocumentVersion) -> Vec<Edit> {
    enum Item {
        Matched(Group),
        Added(usize),
    }
    let mut items = Vec::new();
    let mut gi = groups.iter().peekable();
    let mut j = 0;
    while j < target.len() {
        match gi.peek() {
            Some(gr) if gr.tgt.start == j => {
                items.push(Item::Matched(**gr));
                j = gr.tgt.end;
                gi.next();
            }
            _ => {
                items.push(Item::Added(j));
                j += 1;
            }
        }
    }
    let deleted: Vec<usize> = (0..source.len())
        .filter(|&i| groups.iter().all(|gr| !gr.src.contains(i)))
        .collect();

    // next_matched_start[k]: source start of the first matched item at or after k.
    let mut next_matched_start = vec![usize::MAX; items.len() + 1];
    for k in (0..items.len()).rev() {
        next_matched_start[k] = match &items[k] {
            Item::Matched(gr) => gr.src.start,
            Item::Added(_) => next_matched_start[k + 1],
        };
    }

    let mut edits = Vec::with_capacity(items.len() + deleted.len());
    let mut d = 0;
    let mut push_deleted = |upto: usize, edits: &mut Vec<Edit>| {
        while d < deleted.len() && deleted[d] < upto {
            let span = Span::single(deleted[d]);
            let e = Edit::build(
                edits.len(),
                Some(source.merged(span)),
                None,
                Some(span),
                None,
            );
            edits.push(e);
            d += 1;
        }
    };
    for (k, item) in items.iter().enumerate() {
        push_deleted(next_matched_start[k], &mut edits);
        let e = match *item {
            Item::Matched(gr) => Edit::build(
                edits.len(),
                Some(source.merged(gr.src)),
                Some(target.merged(gr.tgt)),
                Some(gr.src),
                Some(gr.tgt),
            ),
            Item::Added(j) => {
                let span = Span::single(j);
                Edit::build(
                    edits.len(),
                    None,
                    Some(target.merged(span)),
                    None,
                    Some(span),
                )
            }
        };
        edits.push(e);
    }
    push_deleted(usize::MAX, &mut edits);
    edits
}

fn groups_from_map(map: &AlignmentMap) -> Vec<Group> {
    map.entries
        .iter()
        .map(|(&j, &src)| Group {
            src,
            tgt: Span::single(j),
        })
        .collect()
}

/// Greedy alignment of target paragraphs to source paragraphs.
///
/// The returned map may be many-to-one; [`merge_split_paragraphs`] resolves
/// paragraphs that were split across page boundaries.
pub fn align_revisions(
    source: &DocumentVersion,
    target: &DocumentVersion,
) -> (AlignmentMap, Vec<Edit>) {
    let prep = Prepared::new(source, target);
    let groups: Vec<Group> = greedy_map(&prep)
        .into_iter()
        .enumerate()
        .filter_map(|(j, m)| {
            m.map(|i| Group {
                src: Span::single(i),
                tgt: Span::single(j),
            })
        })
        .collect();
    (build_map(&groups), build_edits(&groups, source, target))
}

/// Merges a matched paragraph with an adjacent one on either side when the
/// merged pair's bigram overlap does not drop and its bigram Jaccard
/// similarity strictly rises. Repeats until nothing changes, for at most
/// `max(|S|, |T|)` passes.
///
/// An adjacent source paragraph can be absorbed only if it is unmatched. An
/// adjacent target paragraph can be absorbed if it is unmatched, or if its
/// own match is a subset of this pair's source paragraphs.
pub fn merge_split_paragraphs(
    map: &AlignmentMap,
    source: &DocumentVersion,
    target: &DocumentVersion,
) -> (AlignmentMap, Vec<Edit>) {
    let prep = Prepared::new(source, target);
    let mut groups = groups_from_map(map);
    let cap = source.len().max(target.len()).max(1);
    for _ in 0..cap {
        if !merge_pass(&mut groups, &prep) {
            break;
        }
    }
    (build_map(&groups), build_edits(&groups, source, target))
}

/// Alignment followed by split-paragraph merging.
pub fn extract_edits(
    source: &DocumentVersion,
    target: &DocumentVersion,
) -> (AlignmentMap, Vec<Edit>) {
    let (map, _) = align_revisions(source, target);
    merge_split_paragraphs(&map, source, target)
}

/// Distribution of edit categories and token-change means.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EditStatistics {
    pub edits: usize,
    pub counts: BTreeMap<EditCategory, usize>,
    pub fractions: BTreeMap<EditCategory, f64>,
    pub mean_tokens_added: f64,
    pub mean_tokens_deleted: f64,
}

/// Category fractions over all edits (each edit is one paragraph unit) and
/// mean added/deleted tokens per edit.
pub fn edit_statistics<'a, I>(edits: I) -> EditStatistics
where
    I: IntoIterator<Item = &'a Edit>,
{
    let mut stats = EditStatistics::default();
    let (mut added, mut deleted) = (0usize, 0usize);
    for e in edits {
        stats.edits += 1;
        *stats.counts.entry(e.category).or_default() += 1;
        added += e.tokens_added;
        deleted += e.tokens_deleted;
    }
    if stats.edits > 0 {
        let n = stats.edits as f64;
        for cat in [
            EditCategory::Unchanged,
            EditCategory::Minor,
            EditCategory::Major,
            EditCategory::Added,
            EditCategory::Deleted,
        ] {
            let c = stats.counts.get(&cat).copied().unwrap_or(0);
            stats.fractions.insert(cat, c as f64 / n);
        }
        stats.mean_tokens_added = added as f64 / n;
        stats.mean_tokens_deleted = deleted as f64 / n;
    }
    stats
}
