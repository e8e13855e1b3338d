//! End-to-end runs driven by a JSON configuration.
//!
//! Stages always execute in dependency order, whatever order the config
//! lists them in. A stage whose upstream artifact is neither produced by an
//! earlier requested stage nor already present in the output directory
//! fails before anything is written.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bm25::{
    tune, Bm25Index, Bm25Params, CandidateMode, ThresholdConfig, TuneError, TuneObjective,
};
use crate::corpus::{
    compute_stats, edit_records, edits_from_records, load_alignments, load_comments, load_corpus,
    read_json, read_records, sha256_hex, write_json, write_jsonl, Corpus, CorpusError, CorpusPaths,
    EditRecord, LabelGroup, Meta, PredictionRecord,
};
use crate::eval::{
    build_training_pairs, evaluate, format_table, EvalError, EvalReport, PairRecord, PairSet,
    DEFAULT_NEGATIVES,
};
use crate::labels::{AlignmentLabel, ReviewComment};
use crate::revision::Edit;
use crate::silver::{build_silver_dataset, SilverConfig, SilverDiagnostics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    ExtractEdits,
    SilverAlign,
    BuildTrain,
    Bm25,
    Evaluate,
    Stats,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::ExtractEdits,
        Stage::SilverAlign,
        Stage::BuildTrain,
        Stage::Bm25,
        Stage::Evaluate,
        Stage::Stats,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::ExtractEdits => "extract-edits",
            Stage::SilverAlign => "silver-align",
            Stage::BuildTrain => "build-train",
            Stage::Bm25 => "bm25",
            Stage::Evaluate => "evaluate",
            Stage::Stats => "stats",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const EDITS_FILE: &str = "edits.jsonl";
pub const COMMENTS_FILE: &str = "comments.jsonl";
pub const ALIGNMENTS_FILE: &str = "alignments.jsonl";
pub const SILVER_DIAGNOSTICS_FILE: &str = "silver_diagnostics.json";
pub const TRAIN_FILE: &str = "train_pairs.jsonl";
pub const PREDICTIONS_FILE: &str = "predictions.jsonl";
pub const BM25_CONFIG_FILE: &str = "bm25_config.json";
pub const REPORT_FILE: &str = "report.json";
pub const REPORT_TABLE_FILE: &str = "report.txt";
pub const STATS_FILE: &str = "stats.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsConfig {
    pub papers: PathBuf,
    #[serde(default)]
    pub reviews: Option<PathBuf>,
    #[serde(default)]
    pub responses: Option<PathBuf>,
    /// Manually aligned comments; when given together with
    /// `gold_alignments` they replace the silver labels for bm25/evaluate.
    #[serde(default)]
    pub gold_comments: Option<PathBuf>,
    #[serde(default)]
    pub gold_alignments: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub negatives: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            negatives: DEFAULT_NEGATIVES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bm25StageConfig {
    pub mode: CandidateMode,
    pub objective: TuneObjective,
    /// Fraction of labelled papers used to tune the threshold.
    pub dev_fraction: f64,
    pub params: Bm25Params,
    /// Fixed decision threshold; skips tuning when set.
    pub threshold: Option<f64>,
}

impl Default for Bm25StageConfig {
    fn default() -> Self {
        Bm25StageConfig {
            mode: CandidateMode::TargetText,
            objective: TuneObjective::F1,
            dev_fraction: 0.5,
            params: Bm25Params::default(),
            threshold: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub bootstrap: usize,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig { bootstrap: 1000 }
    }
}

fn all_stages() -> Vec<Stage> {
    Stage::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: InputsConfig,
    pub output_dir: PathBuf,
    #[serde(default = "all_stages")]
    pub stages: Vec<Stage>,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; `None` uses every core. Never affects output.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub silver: SilverConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub bm25: Bm25StageConfig,
    #[serde(default)]
    pub evaluate: EvaluateConfig,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stage {stage} needs {artifact}, which no earlier stage produces and the output directory lacks")]
    MissingArtifact { stage: Stage, artifact: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("stage {stage}: {message}")]
    Stage { stage: Stage, message: String },
}

impl PipelineError {
    /// Process exit status: 2 for missing inputs or upstream artifacts, 1
    /// for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::MissingArtifact { .. }
            | PipelineError::Corpus(CorpusError::MissingInput { .. }) => 2,
            _ => 1,
        }
    }

    fn stage(stage: Stage, err: impl fmt::Display) -> Self {
        PipelineError::Stage {
            stage,
            message: err.to_string(),
        }
    }
}

impl PipelineConfig {
    /// Reads a config file, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let mut cfg: PipelineConfig = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.inputs.papers);
        for p in [
            &mut cfg.inputs.reviews,
            &mut cfg.inputs.responses,
            &mut cfg.inputs.gold_comments,
            &mut cfg.inputs.gold_alignments,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        fix(&mut cfg.output_dir);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_owned()));
        if self.stages.is_empty() {
            return bad("no stages requested");
        }
        if !(0.0..1.0).contains(&self.bm25.dev_fraction) {
            return bad("bm25.dev_fraction must lie in [0, 1)");
        }
        if self.bm25.threshold.is_none()
            && self.bm25.dev_fraction == 0.0
            && self.stages.contains(&Stage::Bm25)
        {
            return bad("bm25 needs a dev split (dev_fraction > 0) or a fixed threshold");
        }
        if self.bm25.params.k1 < 0.0 || !(0.0..=1.0).contains(&self.bm25.params.b) {
            return bad("bm25.params need k1 >= 0 and b in [0, 1]");
        }
        if self.workers == Some(0) {
            return bad("workers must be positive");
        }
        if self.inputs.gold_comments.is_some() != self.inputs.gold_alignments.is_some() {
            return bad("gold_comments and gold_alignments must be given together");
        }
        if self.stages.contains(&Stage::SilverAlign)
            && (self.inputs.reviews.is_none() || self.inputs.responses.is_none())
        {
            return bad("silver-align needs inputs.reviews and inputs.responses");
        }
        Ok(())
    }

    fn has_gold(&self) -> bool {
        self.inputs.gold_comments.is_some() && self.inputs.gold_alignments.is_some()
    }

    /// SHA-256 over the canonical config, with input paths replaced by the
    /// digests of their contents and `output_dir`/`workers` left out, so the
    /// same data and settings hash alike wherever they live.
    pub fn config_hash(&self) -> Result<String, PipelineError> {
        let digest = |p: &Path| -> Result<String, PipelineError> {
            let bytes = std::fs::read(p).map_err(|source| match source.kind() {
                std::io::ErrorKind::NotFound => CorpusError::MissingInput { path: p.to_owned() },
                _ => CorpusError::Io {
                    path: p.to_owned(),
                    source,
                },
            })?;
            Ok(sha256_hex(&bytes))
        };
        let opt = |p: &Option<PathBuf>| p.as_deref().map(digest).transpose();
        let mut stages = self.stages.clone();
        stages.sort();
        stages.dedup();
        let canonical = serde_json::json!({
            "inputs": {
                "papers": digest(&self.inputs.papers)?,
                "reviews": opt(&self.inputs.reviews)?,
                "responses": opt(&self.inputs.responses)?,
                "gold_comments": opt(&self.inputs.gold_comments)?,
                "gold_alignments": opt(&self.inputs.gold_alignments)?,
            },
            "stages": stages,
            "seed": self.seed,
            "silver": self.silver,
            "train": self.train,
            "bm25": self.bm25,
            "evaluate": self.evaluate,
        });
        Ok(sha256_hex(
            serde_json::to_string(&canonical).expect("json").as_bytes(),
        ))
    }
}

/// Files a stage reads from the output directory.
fn upstream(stage: Stage, gold: bool) -> Vec<(&'static str, Stage)> {
    let labels = || {
        if gold {
            vec![]
        } else {
            vec![
                (COMMENTS_FILE, Stage::SilverAlign),
                (ALIGNMENTS_FILE, Stage::SilverAlign),
            ]
        }
    };
    match stage {
        Stage::ExtractEdits => vec![],
        Stage::SilverAlign => vec![(EDITS_FILE, Stage::ExtractEdits)],
        Stage::BuildTrain => vec![
            (EDITS_FILE, Stage::ExtractEdits),
            (COMMENTS_FILE, Stage::SilverAlign),
            (ALIGNMENTS_FILE, Stage::SilverAlign),
        ],
        Stage::Bm25 => [vec![(EDITS_FILE, Stage::ExtractEdits)], labels()].concat(),
        Stage::Evaluate => [
            vec![
                (EDITS_FILE, Stage::ExtractEdits),
                (PREDICTIONS_FILE, Stage::Bm25),
            ],
            labels(),
        ]
        .concat(),
        Stage::Stats => vec![(EDITS_FILE, Stage::ExtractEdits)],
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineOutcome {
    /// Every file written, in the order written.
    pub artifacts: Vec<PathBuf>,
}

/// Papers split into threshold-tuning and held-out test sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperSplit {
    pub dev: Vec<String>,
    pub test: Vec<String>,
}

/// Deterministic split: papers ordered by a seeded hash of their id, the
/// first `round(dev_fraction * n)` go to dev (always leaving one for test).
pub fn split_papers(doc_ids: &BTreeSet<String>, dev_fraction: f64, seed: u64) -> PaperSplit {
    let mut keyed: Vec<(String, &String)> = doc_ids
        .iter()
        .map(|d| (sha256_hex(format!("{seed}:{d}").as_bytes()), d))
        .collect();
    keyed.sort();
    let n = keyed.len();
    let n_dev = ((dev_fraction * n as f64).round() as usize).min(n.saturating_sub(1));
    let mut dev: Vec<String> = keyed[..n_dev].iter().map(|(_, d)| (*d).clone()).collect();
    let mut test: Vec<String> = keyed[n_dev..].iter().map(|(_, d)| (*d).clone()).collect();
    dev.sort();
    test.sort();
    PaperSplit { dev, test }
}

/// Scores of every (comment, candidate edit) pair within each comment's own
/// paper, papers in id order and comments in input order.
pub fn score_comments(
    edits: &BTreeMap<String, Vec<Edit>>,
    comments: &[ReviewComment],
    papers: &[String],
    mode: CandidateMode,
    params: Bm25Params,
) -> Vec<PredictionRecord> {
    let mut by_paper: HashMap<&str, Vec<&ReviewComment>> = HashMap::new();
    for c in comments {
        by_paper.entry(&c.doc_id).or_default().push(c);
    }
    papers
        .par_iter()
        .map(|doc| {
            let Some(cs) = by_paper.get(doc.as_str()) else {
                return Vec::new();
            };
            let index =
                Bm25Index::from_edits(edits.get(doc).map_or(&[][..], Vec::as_slice), mode, params);
            cs.iter()
                .flat_map(|c| {
                    index
                        .score_comment(c)
                        .into_iter()
                        .map(|(edit_id, score)| PredictionRecord {
                            comment_id: c.comment_id.clone(),
                            doc_id: doc.clone(),
                            edit_id,
                            score,
                            label: false,
                        })
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn positive_set(labels: &[AlignmentLabel]) -> HashSet<(&str, &str, usize)> {
    labels
        .iter()
        .filter(|l| l.label)
        .map(|l| (l.comment_id.as_str(), l.doc_id.as_str(), l.edit_id))
        .collect()
}

/// Persisted next to predictions: the threshold and the split it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bm25Artifact {
    #[serde(flatten)]
    pub threshold: ThresholdConfig,
    pub tuned: bool,
    pub split: PaperSplit,
}

/// Tunes a threshold on the dev papers (unless `fixed`) and labels every
/// candidate pair of the test papers.
pub fn run_bm25(
    edits: &BTreeMap<String, Vec<Edit>>,
    comments: &[ReviewComment],
    labels: &[AlignmentLabel],
    cfg: &Bm25StageConfig,
    seed: u64,
) -> Result<(Vec<PredictionRecord>, Bm25Artifact), TuneError> {
    let papers: BTreeSet<String> = comments.iter().map(|c| c.doc_id.clone()).collect();
    let split = match cfg.threshold {
        Some(_) => PaperSplit {
            dev: vec![],
            test: papers.into_iter().collect(),
        },
        None => split_papers(&papers, cfg.dev_fraction, seed),
    };
    let threshold = match cfg.threshold {
        Some(t) => t,
        None => {
            let gold = positive_set(labels);
            let dev = score_comments(edits, comments, &split.dev, cfg.mode, cfg.params);
            let pairs: Vec<(f64, bool)> = dev
                .iter()
                .map(|p| {
                    (
                        p.score,
                        gold.contains(&(p.comment_id.as_str(), p.doc_id.as_str(), p.edit_id)),
                    )
                })
                .collect();
            tune(&pairs, cfg.objective)?
        }
    };
    let mut predictions = score_comments(edits, comments, &split.test, cfg.mode, cfg.params);
    for p in &mut predictions {
        p.label = p.score > threshold;
    }
    let artifact = Bm25Artifact {
        threshold: ThresholdConfig {
            mode: cfg.mode,
            objective: cfg.objective,
            threshold,
            params: cfg.params,
        },
        tuned: cfg.threshold.is_none(),
        split,
    };
    Ok((predictions, artifact))
}

/// Joins predictions with gold positives and edit categories.
pub fn pair_set(
    predictions: &[PredictionRecord],
    gold: &[AlignmentLabel],
    edits: &BTreeMap<String, Vec<Edit>>,
) -> Result<PairSet, EvalError> {
    let gold = positive_set(gold);
    let categories: HashMap<(&str, usize), _> = edits
        .iter()
        .flat_map(|(d, es)| {
            es.iter()
                .map(move |e| ((d.as_str(), e.edit_id), e.category))
        })
        .collect();
    let records = predictions
        .iter()
        .filter_map(|p| {
            let category = *categories.get(&(p.doc_id.as_str(), p.edit_id))?;
            Some(PairRecord {
                paper_id: p.doc_id.clone(),
                comment_id: p.comment_id.clone(),
                edit_id: p.edit_id,
                gold: gold.contains(&(p.comment_id.as_str(), p.doc_id.as_str(), p.edit_id)),
                predicted: p.label,
                edit_category: category,
            })
        })
        .collect();
    PairSet::new(records)
}

type Labelled = (Vec<ReviewComment>, Vec<AlignmentLabel>);

struct Run<'a> {
    cfg: &'a PipelineConfig,
    meta_hash: String,
    corpus: Corpus,
    outcome: PipelineOutcome,
}

impl Run<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.output_dir.join(name)
    }

    fn meta(&self, stage: Stage) -> Meta {
        Meta {
            config_hash: self.meta_hash.clone(),
            seed: self.cfg.seed,
            stage: stage.as_str().to_owned(),
        }
    }

    fn wrote(&mut self, name: &str) {
        let p = self.path(name);
        self.outcome.artifacts.push(p);
    }

    fn edits(&self) -> Result<BTreeMap<String, Vec<Edit>>, PipelineError> {
        Ok(edits_from_records(read_records::<EditRecord>(
            &self.path(EDITS_FILE),
        )?))
    }

    fn silver(&self) -> Result<Labelled, PipelineError> {
        Ok((
            read_records(&self.path(COMMENTS_FILE))?,
            read_records(&self.path(ALIGNMENTS_FILE))?,
        ))
    }

    fn gold(&self, edits: &BTreeMap<String, Vec<Edit>>) -> Result<Option<Labelled>, PipelineError> {
        match (
            &self.cfg.inputs.gold_comments,
            &self.cfg.inputs.gold_alignments,
        ) {
            (Some(c), Some(a)) => Ok(Some((
                load_comments(c, &self.corpus.doc_ids())?,
                load_alignments(a, edits)?,
            ))),
            _ => Ok(None),
        }
    }

    fn eval_labels(&self, edits: &BTreeMap<String, Vec<Edit>>) -> Result<Labelled, PipelineError> {
        match self.gold(edits)? {
            Some(g) => Ok(g),
            None => self.silver(),
        }
    }

    fn run_stage(&mut self, stage: Stage) -> Result<(), PipelineError> {
        let meta = self.meta(stage);
        match stage {
            Stage::ExtractEdits => {
                let edits = self.corpus.extract_edits();
                write_jsonl(&self.path(EDITS_FILE), Some(&meta), &edit_records(&edits))?;
                self.wrote(EDITS_FILE);
            }
            Stage::SilverAlign => {
                let edits = self.edits()?;
                let data = build_silver_dataset(&self.corpus.bundles(&edits), &self.cfg.silver);
                write_jsonl(&self.path(COMMENTS_FILE), Some(&meta), &data.comments)?;
                write_jsonl(&self.path(ALIGNMENTS_FILE), Some(&meta), &data.labels)?;
                write_json(
                    &self.path(SILVER_DIAGNOSTICS_FILE),
                    Some(&meta),
                    &data.diagnostics,
                )?;
                for f in [COMMENTS_FILE, ALIGNMENTS_FILE, SILVER_DIAGNOSTICS_FILE] {
                    self.wrote(f);
                }
            }
            Stage::BuildTrain => {
                let edits = self.edits()?;
                let (comments, labels) = self.silver()?;
                let pairs = build_training_pairs(
                    &labels,
                    &comments,
                    &edits,
                    self.cfg.train.negatives,
                    self.cfg.seed,
                )
                .map_err(|e| PipelineError::stage(stage, e))?;
                write_jsonl(&self.path(TRAIN_FILE), Some(&meta), &pairs)?;
                self.wrote(TRAIN_FILE);
            }
            Stage::Bm25 => {
                let edits = self.edits()?;
                let (comments, labels) = self.eval_labels(&edits)?;
                let (predictions, artifact) =
                    run_bm25(&edits, &comments, &labels, &self.cfg.bm25, self.cfg.seed)
                        .map_err(|e| PipelineError::stage(stage, e))?;
                write_jsonl(&self.path(PREDICTIONS_FILE), Some(&meta), &predictions)?;
                write_json(&self.path(BM25_CONFIG_FILE), Some(&meta), &artifact)?;
                self.wrote(PREDICTIONS_FILE);
                self.wrote(BM25_CONFIG_FILE);
            }
            Stage::Evaluate => {
                let edits = self.edits()?;
                let (_, labels) = self.eval_labels(&edits)?;
                let predictions: Vec<PredictionRecord> =
                    read_records(&self.path(PREDICTIONS_FILE))?;
                let report = pair_set(&predictions, &labels, &edits)
                    .and_then(|pairs| evaluate(&pairs, self.cfg.evaluate.bootstrap, self.cfg.seed))
                    .map_err(|e| PipelineError::stage(stage, e))?;
                write_json(&self.path(REPORT_FILE), Some(&meta), &report)?;
                write_report_table(&self.path(REPORT_TABLE_FILE), &report)?;
                self.wrote(REPORT_FILE);
                self.wrote(REPORT_TABLE_FILE);
            }
            Stage::Stats => {
                let edits = self.edits()?;
                let silver = match (
                    self.path(COMMENTS_FILE).exists(),
                    self.path(ALIGNMENTS_FILE).exists(),
                ) {
                    (true, true) => Some(self.silver()?),
                    _ => None,
                };
                let gold = self.gold(&edits)?;
                let mut groups = Vec::new();
                if let Some((c, l)) = &gold {
                    groups.push(LabelGroup {
                        name: "gold",
                        comments: c,
                        labels: l,
                    });
                }
                if let Some((c, l)) = &silver {
                    groups.push(LabelGroup {
                        name: "silver",
                        comments: c,
                        labels: l,
                    });
                }
                let stats = compute_stats(self.corpus.papers.len(), &edits, &groups);
                write_json(&self.path(STATS_FILE), Some(&meta), &stats)?;
                self.wrote(STATS_FILE);
            }
        }
        Ok(())
    }
}

pub fn write_report_table(path: &Path, report: &EvalReport) -> Result<(), CorpusError> {
    crate::corpus::write_atomic(path, format_table("BM25", report).as_bytes())
}

/// Validates `cfg`, checks stage dependencies, then runs the requested
/// stages on a pool of `cfg.workers` threads.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome, PipelineError> {
    cfg.validate()?;
    let requested: BTreeSet<Stage> = cfg.stages.iter().copied().collect();
    for &stage in &requested {
        for (artifact, producer) in upstream(stage, cfg.has_gold()) {
            let produced = requested.contains(&producer) && producer < stage;
            if !produced && !cfg.output_dir.join(artifact).exists() {
                return Err(PipelineError::MissingArtifact {
                    stage,
                    artifact: artifact.to_owned(),
                });
            }
        }
    }
    let meta_hash = cfg.config_hash()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    pool.install(|| {
        let corpus = load_corpus(&CorpusPaths {
            papers: cfg.inputs.papers.clone(),
            reviews: cfg.inputs.reviews.clone(),
            responses: cfg.inputs.responses.clone(),
            comments: None,
        })?;
        std::fs::create_dir_all(&cfg.output_dir).map_err(|source| CorpusError::Io {
            path: cfg.output_dir.clone(),
            source,
        })?;
        let mut run = Run {
            cfg,
            meta_hash,
            corpus,
            outcome: PipelineOutcome::default(),
        };
        for stage in requested {
            run.run_stage(stage)?;
        }
        Ok(run.outcome)
    })
}

/// Diagnostics of a finished silver-align stage, if present.
pub fn read_silver_diagnostics(output_dir: &Path) -> Result<SilverDiagnostics, CorpusError> {
    read_json(&output_dir.join(SILVER_DIAGNOSTICS_FILE))
}
