//! Okapi BM25 scoring of review comments against edit candidates, with
//! dev-set threshold tuning.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::{AlignmentLabel, Provenance, ReviewComment};
use crate::revision::Edit;
use crate::text::tokenize;

/// Candidates with fewer characters than this are not indexed.
pub const MIN_CANDIDATE_CHARS: usize = 100;

/// Recall a candidate-filter threshold has to beat on the dev set.
pub const RECALL_FILTER_TARGET: f64 = 0.90;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.5, b: 0.75 }
    }
}

/// Which text of an edit is indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CandidateMode {
    /// Post-revision paragraph.
    #[default]
    TargetText,
    /// Rendered `[+ +]`/`[- -]` diff.
    DiffText,
    /// Pre-revision paragraph.
    SourceText,
}

impl CandidateMode {
    pub fn text_of(self, edit: &Edit) -> String {
        match self {
            CandidateMode::TargetText => edit.target_text().to_owned(),
            CandidateMode::DiffText => edit.render(),
            CandidateMode::SourceText => edit.source_text().to_owned(),
        }
    }
}

impl std::str::FromStr for CandidateMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "target" | "target_text" => Ok(CandidateMode::TargetText),
            "diff" | "diff_text" => Ok(CandidateMode::DiffText),
            "source" | "source_text" => Ok(CandidateMode::SourceText),
            other => Err(format!("unknown candidate mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bm25Index {
    params: Bm25Params,
    ids: Vec<usize>,
    term_freqs: Vec<HashMap<String, u32>>,
    doc_lens: Vec<usize>,
    doc_freqs: HashMap<String, usize>,
    avg_doc_len: f64,
}

impl Bm25Index {
    /// Indexes `(id, text)` candidates, skipping texts shorter than
    /// [`MIN_CANDIDATE_CHARS`] characters.
    pub fn build<I, S>(candidates: I, params: Bm25Params) -> Self
    where
        I: IntoIterator<Item = (usize, S)>,
        S: AsRef<str>,
    {
        let mut index = Bm25Index {
            params,
            ids: Vec::new(),
            term_freqs: Vec::new(),
            doc_lens: Vec::new(),
            doc_freqs: HashMap::new(),
            avg_doc_len: 0.0,
        };
        for (id, text) in candidates {
            let text = text.as_ref();
            if text.chars().count() < MIN_CANDIDATE_CHARS {
                continue;
            }
            let tokens: Vec<String> = tokenize(text).into();
            let mut tf: HashMap<String, u32> = HashMap::new();
            for t in &tokens {
                *tf.entry(t.clone()).or_default() += 1;
            }
            for term in tf.keys() {
                *index.doc_freqs.entry(term.clone()).or_default() += 1;
            }
            index.ids.push(id);
            index.doc_lens.push(tokens.len());
            index.term_freqs.push(tf);
        }
        if !index.ids.is_empty() {
            index.avg_doc_len =
                index.doc_lens.iter().sum::<usize>() as f64 / index.ids.len() as f64;
        }
        index
    }

    pub fn from_edits(edits: &[Edit], mode: CandidateMode, params: Bm25Params) -> Self {
        Self::build(edits.iter().map(|e| (e.edit_id, mode.text_of(e))), params)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    fn idf(&self, term: &str) -> f64 {
        let n = self.ids.len() as f64;
        let df = self.doc_freqs.get(term).copied().unwrap_or(0) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Scores every indexed candidate, highest first; ties by id.
    ///
    /// Each query token counts once per occurrence.
    pub fn score(&self, query: &str) -> Vec<(usize, f64)> {
        let query: Vec<String> = tokenize(query).into();
        let Bm25Params { k1, b } = self.params;
        let idfs: Vec<f64> = query.iter().map(|t| self.idf(t)).collect();
        let mut scored: Vec<(usize, f64)> = self
            .ids
            .iter()
            .enumerate()
            .map(|(d, &id)| {
                let norm = if self.avg_doc_len > 0.0 {
                    1.0 - b + b * self.doc_lens[d] as f64 / self.avg_doc_len
                } else {
                    1.0
                };
                let s: f64 = query
                    .iter()
                    .zip(&idfs)
                    .map(|(t, idf)| {
                        let tf = f64::from(self.term_freqs[d].get(t).copied().unwrap_or(0));
                        idf * tf * (k1 + 1.0) / (tf + k1 * norm)
                    })
                    .sum();
                (id, s)
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored
    }

    pub fn score_comment(&self, comment: &ReviewComment) -> Vec<(usize, f64)> {
        self.score(&comment.full_text())
    }
}

/// Labels every scored candidate: positive iff its score exceeds `threshold`.
pub fn predict(
    index: &Bm25Index,
    comments: &[ReviewComment],
    threshold: f64,
) -> Vec<AlignmentLabel> {
    comments
        .iter()
        .flat_map(|c| {
            index
                .score_comment(c)
                .into_iter()
                .map(move |(edit_id, s)| AlignmentLabel {
                    comment_id: c.comment_id.clone(),
                    doc_id: c.doc_id.clone(),
                    edit_id,
                    label: s > threshold,
                    score: Some(s),
                    provenance: Provenance::Predicted,
                })
        })
        .collect()
}

#[derive(Debug, Error, PartialEq)]
pub enum TuneError {
    #[error("dev set has no positive pairs; the decision threshold cannot be tuned")]
    NoPositives,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TuneObjective {
    /// Maximize dev micro-F1.
    #[default]
    F1,
    /// Largest threshold with dev recall above 90%.
    Recall90,
}

impl std::str::FromStr for TuneObjective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f1" => Ok(TuneObjective::F1),
            "recall90" => Ok(TuneObjective::Recall90),
            other => Err(format!("unknown tuning objective `{other}`")),
        }
    }
}

/// Thresholds worth trying, ascending: -inf, midpoints between consecutive
/// distinct scores, +inf. Each yields a distinct classification.
pub fn candidate_thresholds(scores: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut distinct: Vec<f64> = scores.into_iter().collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut out = Vec::with_capacity(distinct.len() + 1);
    out.push(f64::NEG_INFINITY);
    out.extend(distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
    out.push(f64::INFINITY);
    out
}

/// (true positives, false positives) at each candidate threshold, sweeping
/// from the top down.
fn sweep(pairs: &[(f64, bool)]) -> (Vec<f64>, Vec<(usize, usize)>) {
    let thresholds = candidate_thresholds(pairs.iter().map(|p| p.0));
    let mut sorted: Vec<(f64, bool)> = pairs.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut counts = vec![(0, 0); thresholds.len()];
    let (mut tp, mut fp, mut k) = (0, 0, 0);
    for (t, slot) in thresholds.iter().zip(counts.iter_mut()).rev() {
        while k < sorted.len() && sorted[k].0 > *t {
            if sorted[k].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        *slot = (tp, fp);
    }
    (thresholds, counts)
}

fn positives(pairs: &[(f64, bool)]) -> Result<usize, TuneError> {
    match pairs.iter().filter(|p| p.1).count() {
        0 => Err(TuneError::NoPositives),
        n => Ok(n),
    }
}

/// Threshold maximizing micro-F1 over `(score, gold)` pairs; ties go to the
/// higher threshold.
pub fn tune_threshold(pairs: &[(f64, bool)]) -> Result<f64, TuneError> {
    let total_pos = positives(pairs)?;
    let (thresholds, counts) = sweep(pairs);
    let mut best = (f64::NEG_INFINITY, -1.0);
    for (&t, &(tp, fp)) in thresholds.iter().zip(&counts) {
        let f1 = crate::eval::Counts {
            tp,
            fp,
            fn_: total_pos - tp,
        }
        .f1();
        if f1 >= best.1 {
            best = (t, f1);
        }
    }
    Ok(best.0)
}

/// Largest threshold whose dev recall is strictly above 90%.
pub fn tune_recall_filter(pairs: &[(f64, bool)]) -> Result<f64, TuneError> {
    let total_pos = positives(pairs)?;
    let (thresholds, counts) = sweep(pairs);
    Ok(thresholds
        .iter()
        .zip(&counts)
        .rev()
        .find(|(_, &(tp, _))| 10 * tp > 9 * total_pos)
        .map_or(f64::NEG_INFINITY, |(&t, _)| t))
}

pub fn tune(pairs: &[(f64, bool)], objective: TuneObjective) -> Result<f64, TuneError> {
    match objective {
        TuneObjective::F1 => tune_threshold(pairs),
        TuneObjective::Recall90 => tune_recall_filter(pairs),
    }
}

/// Serializes infinite thresholds as the strings `"inf"` / `"-inf"`.
pub mod threshold_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("bad threshold `{other}`"))),
            },
        }
    }
}

/// Tuned threshold persisted next to predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub mode: CandidateMode,
    pub objective: TuneObjective,
    #[serde(with = "threshold_serde")]
    pub threshold: f64,
    pub params: Bm25Params,
}
