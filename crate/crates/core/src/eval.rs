//! Alignment metrics: micro and paper-grouped macro precision/recall/F1,
//! addition-only variants, BCa bootstrap intervals, and training-pair
//! construction with negative sampling.
//!
//! All metric values are percentages in `[0, 100]`.

use std::collections::{BTreeMap, HashSet};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::bm25::MIN_CANDIDATE_CHARS;
use crate::labels::{AlignmentLabel, ReviewComment};
use crate::revision::{Edit, EditCategory};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no comment-edit pairs to evaluate")]
    Empty,
    #[error("pair ({comment_id}, {doc_id}#{edit_id}) appears more than once")]
    DuplicatePair {
        comment_id: String,
        doc_id: String,
        edit_id: usize,
    },
    #[error("bootstrap needs at least two papers, got {0}")]
    TooFewPapers(usize),
    #[error("comment {comment_id} has {available} eligible negative edits, {needed} required")]
    InsufficientNegatives {
        comment_id: String,
        available: usize,
        needed: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

impl Counts {
    fn record(&mut self, gold: bool, predicted: bool) {
        match (gold, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => {}
        }
    }

    /// Precision, recall and F1 in percent.
    ///
    /// With no gold and no predicted positives all three are 100. Otherwise
    /// an empty denominator yields 0.
    pub fn prf(&self) -> Prf {
        let Counts { tp, fp, fn_ } = *self;
        if tp + fp + fn_ == 0 {
            return Prf {
                precision: 100.0,
                recall: 100.0,
                f1: 100.0,
            };
        }
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                100.0 * num as f64 / den as f64
            }
        };
        Prf {
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            f1: ratio(2 * tp, 2 * tp + fp + fn_),
        }
    }

    pub fn f1(&self) -> f64 {
        self.prf().f1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub paper_id: String,
    pub comment_id: String,
    pub edit_id: usize,
    pub gold: bool,
    pub predicted: bool,
    pub edit_category: EditCategory,
}

/// Judged comment-edit pairs, unique per (comment, paper, edit).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairSet {
    records: Vec<PairRecord>,
}

impl PairSet {
    pub fn new(records: Vec<PairRecord>) -> Result<Self, EvalError> {
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert((r.comment_id.as_str(), r.paper_id.as_str(), r.edit_id)) {
                return Err(EvalError::DuplicatePair {
                    comment_id: r.comment_id.clone(),
                    doc_id: r.paper_id.clone(),
                    edit_id: r.edit_id,
                });
            }
        }
        Ok(PairSet { records })
    }

    pub fn records(&self) -> &[PairRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Confusion counts per paper, ordered by paper id.
    pub fn paper_counts(&self) -> Vec<(String, Counts)> {
        let mut by_paper: BTreeMap<&str, Counts> = BTreeMap::new();
        for r in &self.records {
            by_paper
                .entry(&r.paper_id)
                .or_default()
                .record(r.gold, r.predicted);
        }
        by_paper
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v))
            .collect()
    }
}

pub fn micro_metrics(pairs: &PairSet) -> Result<Prf, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut c = Counts::default();
    for r in pairs.records() {
        c.record(r.gold, r.predicted);
    }
    Ok(c.prf())
}

/// Per-paper metrics averaged uniformly over papers.
pub fn macro_metrics(pairs: &PairSet) -> Result<Prf, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(macro_of(pairs.paper_counts().iter().map(|(_, c)| c)))
}

fn macro_of<'a>(counts: impl Iterator<Item = &'a Counts>) -> Prf {
    let (mut sum, mut n) = (Prf::default(), 0usize);
    for c in counts {
        let p = c.prf();
        sum.precision += p.precision;
        sum.recall += p.recall;
        sum.f1 += p.f1;
        n += 1;
    }
    let n = n.max(1) as f64;
    Prf {
        precision: sum.precision / n,
        recall: sum.recall / n,
        f1: sum.f1 / n,
    }
}

/// Pairs whose edit adds a whole paragraph.
pub fn ao_filter(pairs: &PairSet) -> PairSet {
    PairSet {
        records: pairs
            .records()
            .iter()
            .filter(|r| r.edit_category == EditCategory::Added)
            .cloned()
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum F1Kind {
    Micro,
    Macro,
}

impl F1Kind {
    fn of(self, counts: &[Counts], draw: impl Iterator<Item = usize>) -> f64 {
        match self {
            F1Kind::Micro => {
                let mut total = Counts::default();
                for i in draw {
                    total += counts[i];
                }
                total.f1()
            }
            F1Kind::Macro => {
                let (mut sum, mut n) = (0.0, 0usize);
                for i in draw {
                    sum += counts[i].f1();
                    n += 1;
                }
                sum / n.max(1) as f64
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

/// Confidence level of reported intervals.
pub const CI_LEVEL: f64 = 0.95;

/// Paper indices drawn with replacement for resample `b`.
///
/// Resample `b` uses ChaCha8 seeded with `seed` on stream `b`, one
/// `random_range(0..n)` per paper, so any resample can be regenerated
/// independently of the others.
pub fn resample_indices(seed: u64, b: u64, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Linear-interpolation quantile of sorted values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// 95% BCa bootstrap interval for micro or macro F1, resampling papers.
///
/// The bias correction counts ties with the point estimate as half below,
/// and the acceleration comes from a leave-one-paper-out jackknife. The
/// interval is widened to contain the point estimate if needed.
pub fn bootstrap_ci(
    pairs: &PairSet,
    kind: F1Kind,
    resamples: usize,
    seed: u64,
) -> Result<Interval, EvalError> {
    let counts: Vec<Counts> = pairs.paper_counts().into_iter().map(|(_, c)| c).collect();
    let n = counts.len();
    if n < 2 {
        return Err(EvalError::TooFewPapers(n));
    }
    let point = kind.of(&counts, 0..n);
    let mut stats: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map(|b| kind.of(&counts, resample_indices(seed, b, n).into_iter()))
        .collect();
    if stats.is_empty() {
        return Ok(Interval {
            low: point,
            high: point,
        });
    }
    stats.sort_by(f64::total_cmp);
    if stats[0] == stats[stats.len() - 1] {
        let v = stats[0];
        return Ok(Interval {
            low: v.min(point),
            high: v.max(point),
        });
    }

    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let b = stats.len() as f64;
    let below = stats.iter().filter(|&&s| s < point).count() as f64;
    let ties = stats.iter().filter(|&&s| s == point).count() as f64;
    let prop = ((below + 0.5 * ties) / b).clamp(0.5 / b, 1.0 - 0.5 / b);
    let z0 = normal.inverse_cdf(prop);

    let jack: Vec<f64> = (0..n)
        .map(|skip| kind.of(&counts, (0..n).filter(|&i| i != skip)))
        .collect();
    let mean = jack.iter().sum::<f64>() / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for j in &jack {
        let d = mean - j;
        num += d * d * d;
        den += d * d;
    }
    let accel = if den > 0.0 {
        num / (6.0 * den.powf(1.5))
    } else {
        0.0
    };

    let alpha = (1.0 - CI_LEVEL) / 2.0;
    let adjusted = |z: f64| normal.cdf(z0 + (z0 + z) / (1.0 - accel * (z0 + z)));
    let lo_q = adjusted(normal.inverse_cdf(alpha));
    let hi_q = adjusted(normal.inverse_cdf(1.0 - alpha));
    let low = quantile(&stats, lo_q);
    let high = quantile(&stats, hi_q);
    Ok(Interval {
        low: low.min(point),
        high: high.max(point),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub pairs: usize,
    pub papers: usize,
    pub micro: Prf,
    #[serde(rename = "macro")]
    pub macro_: Prf,
    /// Addition-only F1; absent when no pair involves an added paragraph.
    pub micro_ao_f1: Option<f64>,
    pub macro_ao_f1: Option<f64>,
    pub micro_f1_ci: Option<Interval>,
    pub macro_f1_ci: Option<Interval>,
    pub micro_ao_f1_ci: Option<Interval>,
    pub macro_ao_f1_ci: Option<Interval>,
    pub resamples: usize,
    pub seed: u64,
}

/// All metrics, with bootstrap intervals when `resamples > 0` and there are
/// at least two papers.
pub fn evaluate(pairs: &PairSet, resamples: usize, seed: u64) -> Result<EvalReport, EvalError> {
    let micro = micro_metrics(pairs)?;
    let macro_ = macro_metrics(pairs)?;
    let ao = ao_filter(pairs);
    let (micro_ao_f1, macro_ao_f1) = if ao.is_empty() {
        (None, None)
    } else {
        (Some(micro_metrics(&ao)?.f1), Some(macro_metrics(&ao)?.f1))
    };
    let ci = |set: &PairSet, kind| -> Option<Interval> {
        if resamples == 0 || set.is_empty() {
            return None;
        }
        bootstrap_ci(set, kind, resamples, seed).ok()
    };
    Ok(EvalReport {
        pairs: pairs.len(),
        papers: pairs.paper_counts().len(),
        micro,
        macro_,
        micro_ao_f1,
        macro_ao_f1,
        micro_f1_ci: ci(pairs, F1Kind::Micro),
        macro_f1_ci: ci(pairs, F1Kind::Macro),
        micro_ao_f1_ci: ci(&ao, F1Kind::Micro),
        macro_ao_f1_ci: ci(&ao, F1Kind::Macro),
        resamples,
        seed,
    })
}

/// One decimal, halves rounded up.
pub fn pct(v: f64) -> String {
    format!("{:.1}", (v * 10.0).round() / 10.0)
}

fn with_ci(v: f64, ci: Option<Interval>) -> String {
    match ci {
        Some(i) => format!("{} [{}, {}]", pct(v), pct(i.low), pct(i.high)),
        None => pct(v),
    }
}

/// Plain-text table with micro and macro P/R/F1 and AO-F1 columns.
pub fn format_table(name: &str, report: &EvalReport) -> String {
    let opt = |v: Option<f64>, ci| v.map_or("-".to_owned(), |v| with_ci(v, ci));
    let header = [
        "Method",
        "Micro AO-F1",
        "Micro P",
        "Micro R",
        "Micro F1",
        "Macro AO-F1",
        "Macro P",
        "Macro R",
        "Macro F1",
    ];
    let row = [
        name.to_owned(),
        opt(report.micro_ao_f1, report.micro_ao_f1_ci),
        pct(report.micro.precision),
        pct(report.micro.recall),
        with_ci(report.micro.f1, report.micro_f1_ci),
        opt(report.macro_ao_f1, report.macro_ao_f1_ci),
        pct(report.macro_.precision),
        pct(report.macro_.recall),
        with_ci(report.macro_.f1, report.macro_f1_ci),
    ];
    let widths: Vec<usize> = header
        .iter()
        .zip(&row)
        .map(|(h, r)| h.len().max(r.len()))
        .collect();
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join(" | ")
    };
    format!(
        "{}\n{}\n{}\n",
        line(header.to_vec()),
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("-|-"),
        line(row.iter().map(String::as_str).collect())
    )
}

/// A labeled pair for training, possibly crossing papers for negatives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub comment_id: String,
    pub comment_doc_id: String,
    pub doc_id: String,
    pub edit_id: usize,
    pub label: bool,
}

pub const DEFAULT_NEGATIVES: usize = 20;

/// Positive pairs from `labels` plus `negatives_per_comment` negatives per
/// comment, drawn without replacement from edits of other papers that have
/// at least [`MIN_CANDIDATE_CHARS`] characters.
///
/// Comment `k` samples with ChaCha8 seeded by `seed` on stream `k`.
pub fn build_training_pairs(
    labels: &[AlignmentLabel],
    comments: &[ReviewComment],
    edits: &BTreeMap<String, Vec<Edit>>,
    negatives_per_comment: usize,
    seed: u64,
) -> Result<Vec<TrainingPair>, EvalError> {
    let pool: Vec<(&str, usize)> = edits
        .iter()
        .flat_map(|(doc, es)| {
            es.iter()
                .filter(|e| e.text().chars().count() >= MIN_CANDIDATE_CHARS)
                .map(move |e| (doc.as_str(), e.edit_id))
        })
        .collect();
    let mut positives: BTreeMap<&str, Vec<&AlignmentLabel>> = BTreeMap::new();
    for l in labels.iter().filter(|l| l.label) {
        positives.entry(&l.comment_id).or_default().push(l);
    }

    let per_comment: Vec<Result<Vec<TrainingPair>, EvalError>> = comments
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let foreign: Vec<&(&str, usize)> =
                pool.iter().filter(|(d, _)| *d != c.doc_id).collect();
            if foreign.len() < negatives_per_comment {
                return Err(EvalError::InsufficientNegatives {
                    comment_id: c.comment_id.clone(),
                    available: foreign.len(),
                    needed: negatives_per_comment,
                });
            }
            let mut out: Vec<TrainingPair> = Vec::new();
            let mut pos: Vec<&&AlignmentLabel> = positives
                .get(c.comment_id.as_str())
                .into_iter()
                .flatten()
                .collect();
            pos.sort_by(|a, b| (&a.doc_id, a.edit_id).cmp(&(&b.doc_id, b.edit_id)));
            pos.dedup_by(|a, b| a.doc_id == b.doc_id && a.edit_id == b.edit_id);
            out.extend(pos.into_iter().map(|l| TrainingPair {
                comment_id: c.comment_id.clone(),
                comment_doc_id: c.doc_id.clone(),
                doc_id: l.doc_id.clone(),
                edit_id: l.edit_id,
                label: true,
            }));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut picked = sample(&mut rng, foreign.len(), negatives_per_comment).into_vec();
            picked.sort_unstable();
            out.extend(picked.into_iter().map(|i| TrainingPair {
                comment_id: c.comment_id.clone(),
                comment_doc_id: c.doc_id.clone(),
                doc_id: foreign[i].0.to_owned(),
                edit_id: foreign[i].1,
                label: false,
            }));
            Ok(out)
        })
        .collect();
    per_comment.into_iter().try_fold(Vec::new(), |mut acc, r| {
        acc.extend(r?);
        Ok(acc)
    })
}
