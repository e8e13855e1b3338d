//! JSON Lines interchange files, corpus loading and validation, and corpus
//! statistics.
//!
//! Every file is UTF-8 with one JSON object per line. Files written by this
//! crate start with a `{"_meta": ...}` line carrying the configuration hash
//! and seed that produced them; readers skip it.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::labels::{AlignmentLabel, ReviewComment};
use crate::revision::{
    edit_statistics, extract_edits, DocumentVersion, Edit, EditStatistics, Role,
};
use crate::silver::{AuthorResponse, PaperBundle, Review};
use crate::text::{tokenize, unigram_overlap};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: required input does not exist")]
    MissingInput { path: PathBuf },
    #[error("{path}:{line}: malformed record: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: {kind} {id} references unknown paper {doc_id}")]
    DanglingDocId {
        path: PathBuf,
        line: usize,
        kind: &'static str,
        id: String,
        doc_id: String,
    },
    #[error("{path}:{line}: duplicate {kind} {id}")]
    Duplicate {
        path: PathBuf,
        line: usize,
        kind: &'static str,
        id: String,
    },
    #[error("{path}:{line}: {message}")]
    Invalid {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

/// A paragraph as it appears in `papers.jsonl`: bare text or an object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParagraphRecord {
    Text(String),
    Full {
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        section: Option<String>,
    },
}

impl ParagraphRecord {
    pub fn text(&self) -> &str {
        match self {
            ParagraphRecord::Text(t) | ParagraphRecord::Full { text: t, .. } => t,
        }
    }

    pub fn section(&self) -> Option<&str> {
        match self {
            ParagraphRecord::Text(_) => None,
            ParagraphRecord::Full { section, .. } => section.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub doc_id: String,
    pub source: Vec<ParagraphRecord>,
    pub target: Vec<ParagraphRecord>,
}

impl PaperRecord {
    pub fn version(&self, role: Role) -> DocumentVersion {
        let paras = match role {
            Role::Source => &self.source,
            Role::Target => &self.target,
        };
        DocumentVersion::with_sections(
            self.doc_id.clone(),
            role,
            paras
                .iter()
                .map(|p| (p.text().to_owned(), p.section().map(str::to_owned))),
        )
    }
}

/// One line of `edits.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditRecord {
    pub doc_id: String,
    #[serde(flatten)]
    pub edit: Edit,
    pub diff: String,
}

/// One line of `predictions.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub comment_id: String,
    pub doc_id: String,
    pub edit_id: usize,
    pub score: f64,
    pub label: bool,
}

/// Provenance stamped into every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub config_hash: String,
    pub seed: u64,
    pub stage: String,
}

#[derive(Serialize)]
struct MetaLine<'a> {
    #[serde(rename = "_meta")]
    meta: &'a Meta,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            CorpusError::MissingInput {
                path: path.to_owned(),
            }
        } else {
            CorpusError::Io {
                path: path.to_owned(),
                source,
            }
        }
    }
}

/// Reads records with their 1-based line numbers, skipping blank and
/// `_meta` lines.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("{\"_meta\"") {
            continue;
        }
        let rec = serde_json::from_str(trimmed).map_err(|e| CorpusError::Malformed {
            path: path.to_owned(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    Ok(read_jsonl(path)?.into_iter().map(|(_, r)| r).collect())
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CorpusError::Io {
        path: path.to_owned(),
        source: e.error,
    })?;
    Ok(())
}

pub fn jsonl_bytes<'a, T, I>(meta: Option<&Meta>, records: I) -> Vec<u8>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let mut buf = Vec::new();
    if let Some(meta) = meta {
        serde_json::to_writer(&mut buf, &MetaLine { meta }).expect("meta serializes");
        buf.push(b'\n');
    }
    for r in records {
        serde_json::to_writer(&mut buf, r).expect("record serializes");
        buf.push(b'\n');
    }
    buf
}

pub fn write_jsonl<'a, T, I>(path: &Path, meta: Option<&Meta>, records: I) -> Result<()>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    write_atomic(path, &jsonl_bytes(meta, records))
}

/// Writes a JSON document with a `_meta` field alongside `body`'s fields.
pub fn write_json<T: Serialize>(path: &Path, meta: Option<&Meta>, body: &T) -> Result<()> {
    let mut value = serde_json::to_value(body).expect("body serializes");
    if let (Some(meta), serde_json::Value::Object(map)) = (meta, &mut value) {
        map.insert(
            "_meta".into(),
            serde_json::to_value(meta).expect("meta serializes"),
        );
    }
    let mut bytes = serde_json::to_vec_pretty(&value).expect("json serializes");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    serde_json::from_slice(&bytes).map_err(|e| CorpusError::Malformed {
        path: path.to_owned(),
        line: e.line(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, Default)]
pub struct CorpusPaths {
    pub papers: PathBuf,
    pub reviews: Option<PathBuf>,
    pub responses: Option<PathBuf>,
    pub comments: Option<PathBuf>,
}

/// A validated corpus: every id is unique within its kind and every
/// record's `doc_id` names a loaded paper.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub papers: Vec<PaperRecord>,
    pub reviews: Vec<Review>,
    pub responses: Vec<AuthorResponse>,
    pub comments: Vec<ReviewComment>,
}

fn check_unique(
    path: &Path,
    kind: &'static str,
    items: impl Iterator<Item = (usize, String)>,
) -> Result<()> {
    let mut seen = HashSet::new();
    for (line, id) in items {
        if !seen.insert(id.clone()) {
            return Err(CorpusError::Duplicate {
                path: path.to_owned(),
                line,
                kind,
                id,
            });
        }
    }
    Ok(())
}

fn check_refs(
    path: &Path,
    kind: &'static str,
    known: &HashSet<String>,
    items: impl Iterator<Item = (usize, String, String)>,
) -> Result<()> {
    for (line, id, doc_id) in items {
        if !known.contains(&doc_id) {
            return Err(CorpusError::DanglingDocId {
                path: path.to_owned(),
                line,
                kind,
                id,
                doc_id,
            });
        }
    }
    Ok(())
}

pub fn load_corpus(paths: &CorpusPaths) -> Result<Corpus> {
    let papers = read_jsonl::<PaperRecord>(&paths.papers)?;
    check_unique(
        &paths.papers,
        "paper",
        papers.iter().map(|(l, p)| (*l, p.doc_id.clone())),
    )?;
    let known: HashSet<String> = papers.iter().map(|(_, p)| p.doc_id.clone()).collect();

    let mut corpus = Corpus {
        papers: papers.into_iter().map(|(_, p)| p).collect(),
        ..Corpus::default()
    };
    if let Some(path) = &paths.reviews {
        let recs = read_jsonl::<Review>(path)?;
        check_unique(
            path,
            "review",
            recs.iter().map(|(l, r)| (*l, r.review_id.clone())),
        )?;
        check_refs(
            path,
            "review",
            &known,
            recs.iter()
                .map(|(l, r)| (*l, r.review_id.clone(), r.doc_id.clone())),
        )?;
        corpus.reviews = recs.into_iter().map(|(_, r)| r).collect();
    }
    if let Some(path) = &paths.responses {
        let recs = read_jsonl::<AuthorResponse>(path)?;
        check_unique(
            path,
            "response",
            recs.iter().map(|(l, r)| (*l, r.response_id.clone())),
        )?;
        check_refs(
            path,
            "response",
            &known,
            recs.iter()
                .map(|(l, r)| (*l, r.response_id.clone(), r.doc_id.clone())),
        )?;
        corpus.responses = recs.into_iter().map(|(_, r)| r).collect();
    }
    if let Some(path) = &paths.comments {
        corpus.comments = load_comments(path, &known)?;
    }
    Ok(corpus)
}

/// Loads comments, checking id uniqueness, non-empty text and paper refs.
pub fn load_comments(path: &Path, known_papers: &HashSet<String>) -> Result<Vec<ReviewComment>> {
    let recs = read_jsonl::<ReviewComment>(path)?;
    check_unique(
        path,
        "comment",
        recs.iter().map(|(l, c)| (*l, c.comment_id.clone())),
    )?;
    check_refs(
        path,
        "comment",
        known_papers,
        recs.iter()
            .map(|(l, c)| (*l, c.comment_id.clone(), c.doc_id.clone())),
    )?;
    if let Some((line, c)) = recs.iter().find(|(_, c)| c.text.trim().is_empty()) {
        return Err(CorpusError::Invalid {
            path: path.to_owned(),
            line: *line,
            message: format!("comment {} has empty text", c.comment_id),
        });
    }
    Ok(recs.into_iter().map(|(_, c)| c).collect())
}

/// Loads alignment labels, checking that each references a known edit.
pub fn load_alignments(
    path: &Path,
    edits: &BTreeMap<String, Vec<Edit>>,
) -> Result<Vec<AlignmentLabel>> {
    let recs = read_jsonl::<AlignmentLabel>(path)?;
    for (line, l) in &recs {
        let known = edits
            .get(&l.doc_id)
            .is_some_and(|es| es.iter().any(|e| e.edit_id == l.edit_id));
        if !known {
            return Err(CorpusError::Invalid {
                path: path.to_owned(),
                line: *line,
                message: format!(
                    "label for {} references unknown edit {}#{}",
                    l.comment_id, l.doc_id, l.edit_id
                ),
            });
        }
    }
    Ok(recs.into_iter().map(|(_, l)| l).collect())
}

impl Corpus {
    pub fn doc_ids(&self) -> HashSet<String> {
        self.papers.iter().map(|p| p.doc_id.clone()).collect()
    }

    /// Source and target of every paper aligned into edits, keyed by doc id.
    pub fn extract_edits(&self) -> BTreeMap<String, Vec<Edit>> {
        self.papers
            .par_iter()
            .map(|p| {
                let (_, edits) = extract_edits(&p.version(Role::Source), &p.version(Role::Target));
                (p.doc_id.clone(), edits)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect()
    }

    /// Groups reviews and responses with each paper's edits.
    pub fn bundles(&self, edits: &BTreeMap<String, Vec<Edit>>) -> Vec<PaperBundle> {
        let mut reviews: HashMap<&str, Vec<Review>> = HashMap::new();
        for r in &self.reviews {
            reviews.entry(&r.doc_id).or_default().push(r.clone());
        }
        let mut responses: HashMap<&str, Vec<AuthorResponse>> = HashMap::new();
        for r in &self.responses {
            responses.entry(&r.doc_id).or_default().push(r.clone());
        }
        self.papers
            .iter()
            .map(|p| PaperBundle {
                doc_id: p.doc_id.clone(),
                reviews: reviews.remove(p.doc_id.as_str()).unwrap_or_default(),
                responses: responses.remove(p.doc_id.as_str()).unwrap_or_default(),
                edits: edits.get(&p.doc_id).cloned().unwrap_or_default(),
            })
            .collect()
    }

    /// Writes the corpus back out as JSONL files in `dir`.
    pub fn save(&self, dir: &Path) -> Result<CorpusPaths> {
        let paths = CorpusPaths {
            papers: dir.join("papers.jsonl"),
            reviews: Some(dir.join("reviews.jsonl")),
            responses: Some(dir.join("responses.jsonl")),
            comments: Some(dir.join("comments.jsonl")),
        };
        write_jsonl(&paths.papers, None, &self.papers)?;
        write_jsonl(paths.reviews.as_ref().unwrap(), None, &self.reviews)?;
        write_jsonl(paths.responses.as_ref().unwrap(), None, &self.responses)?;
        write_jsonl(paths.comments.as_ref().unwrap(), None, &self.comments)?;
        Ok(paths)
    }
}

pub fn edit_records(edits: &BTreeMap<String, Vec<Edit>>) -> Vec<EditRecord> {
    edits
        .iter()
        .flat_map(|(doc, es)| {
            es.iter().map(move |e| EditRecord {
                doc_id: doc.clone(),
                diff: e.render(),
                edit: e.clone(),
            })
        })
        .collect()
}

pub fn edits_from_records(records: Vec<EditRecord>) -> BTreeMap<String, Vec<Edit>> {
    let mut out: BTreeMap<String, Vec<Edit>> = BTreeMap::new();
    for r in records {
        out.entry(r.doc_id).or_default().push(r.edit);
    }
    for es in out.values_mut() {
        es.sort_by_key(|e| e.edit_id);
    }
    out
}

/// Mean comment-edit unigram overlap within one geometric-mean length bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapBin {
    /// Bin covers geometric mean lengths in `[lower, upper)` tokens.
    pub lower: f64,
    pub upper: f64,
    pub pairs: usize,
    pub mean_overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OverlapStats {
    pub pairs: usize,
    pub mean_overlap: f64,
    pub bins: Vec<OverlapBin>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupStats {
    pub name: String,
    pub papers: usize,
    pub comments: usize,
    /// Distinct edits with a positive label; an edit answering several
    /// comments counts once.
    pub aligned_edits: usize,
    pub mean_tokens_added: f64,
    pub mean_tokens_deleted: f64,
    pub overlap: OverlapStats,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StatsReport {
    pub papers: usize,
    pub edits: EditStatistics,
    pub groups: Vec<GroupStats>,
}

/// A named comment set with its labels (e.g. manual vs synthetic).
pub struct LabelGroup<'a> {
    pub name: &'a str,
    pub comments: &'a [ReviewComment],
    pub labels: &'a [AlignmentLabel],
}

/// Power-of-two bin `[2^k, 2^(k+1))` holding `x`, or `[0, 1)`.
fn pow2_bin(x: f64) -> (f64, f64) {
    if x < 1.0 {
        (0.0, 1.0)
    } else {
        let k = x.log2().floor();
        (k.exp2(), (k + 1.0).exp2())
    }
}

fn group_stats(group: &LabelGroup<'_>, edits: &BTreeMap<String, Vec<Edit>>) -> GroupStats {
    let comments: HashMap<&str, &ReviewComment> = group
        .comments
        .iter()
        .map(|c| (c.comment_id.as_str(), c))
        .collect();
    let lookup = |doc: &str, id: usize| {
        edits
            .get(doc)
            .and_then(|es| es.iter().find(|e| e.edit_id == id))
    };

    let mut aligned: BTreeSet<(&str, usize)> = BTreeSet::new();
    let mut papers: BTreeSet<&str> = group.comments.iter().map(|c| c.doc_id.as_str()).collect();
    let mut seen_pairs = HashSet::new();
    let mut overlaps: Vec<(f64, f64)> = Vec::new();
    for l in group.labels.iter().filter(|l| l.label) {
        papers.insert(&l.doc_id);
        aligned.insert((&l.doc_id, l.edit_id));
        if !seen_pairs.insert((&l.comment_id, &l.doc_id, l.edit_id)) {
            continue;
        }
        let (Some(c), Some(e)) = (
            comments.get(l.comment_id.as_str()),
            lookup(&l.doc_id, l.edit_id),
        ) else {
            continue;
        };
        let (ct, et) = (tokenize(&c.full_text()), tokenize(e.text()));
        let gm = ((ct.len() * et.len()) as f64).sqrt();
        overlaps.push((gm, unigram_overlap(&ct, &et).value()));
    }

    let aligned_edits: Vec<&Edit> = aligned
        .iter()
        .filter_map(|&(d, id)| lookup(d, id))
        .collect();
    let mean = |f: fn(&Edit) -> usize| {
        if aligned_edits.is_empty() {
            0.0
        } else {
            aligned_edits.iter().map(|e| f(e) as f64).sum::<f64>() / aligned_edits.len() as f64
        }
    };

    let mut bins: BTreeMap<u64, (f64, f64, usize, f64)> = BTreeMap::new();
    for &(gm, ov) in &overlaps {
        let (lo, hi) = pow2_bin(gm);
        let slot = bins.entry(lo.to_bits()).or_insert((lo, hi, 0, 0.0));
        slot.2 += 1;
        slot.3 += ov;
    }
    let mut bins: Vec<OverlapBin> = bins
        .into_values()
        .map(|(lower, upper, n, sum)| OverlapBin {
            lower,
            upper,
            pairs: n,
            mean_overlap: sum / n as f64,
        })
        .collect();
    bins.sort_by(|a, b| a.lower.total_cmp(&b.lower));

    GroupStats {
        name: group.name.to_owned(),
        papers: papers.len(),
        comments: group.comments.len(),
        aligned_edits: aligned.len(),
        mean_tokens_added: mean(|e| e.tokens_added),
        mean_tokens_deleted: mean(|e| e.tokens_deleted),
        overlap: OverlapStats {
            pairs: overlaps.len(),
            mean_overlap: if overlaps.is_empty() {
                0.0
            } else {
                overlaps.iter().map(|o| o.1).sum::<f64>() / overlaps.len() as f64
            },
            bins,
        },
    }
}

/// Corpus-wide edit distribution plus per-group counts and overlap.
pub fn compute_stats(
    papers: usize,
    edits: &BTreeMap<String, Vec<Edit>>,
    groups: &[LabelGroup<'_>],
) -> StatsReport {
    StatsReport {
        papers,
        edits: edit_statistics(edits.values().flatten()),
        groups: groups.iter().map(|g| group_stats(g, edits)).collect(),
    }
}
