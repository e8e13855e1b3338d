use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use revalign::bm25::{Bm25Params, CandidateMode, TuneObjective};
use revalign::corpus::{
    compute_stats, edit_records, edits_from_records, load_alignments, load_comments, load_corpus,
    read_records, sha256_hex, write_json, write_jsonl, CorpusError, CorpusPaths, EditRecord,
    LabelGroup, Meta, PredictionRecord,
};
use revalign::eval::{build_training_pairs, evaluate, format_table, DEFAULT_NEGATIVES};
use revalign::labels::{AlignmentLabel, ReviewComment};
use revalign::pipeline::{
    pair_set, run_bm25, run_pipeline, Bm25StageConfig, PipelineConfig, PipelineError,
};
use revalign::revision::Edit;
use revalign::silver::{build_silver_dataset, ReplyTarget, SilverConfig};

/// Align paper revisions with the review comments that prompted them.
#[derive(Parser)]
#[command(name = "revalign", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Align each paper's versions and write its paragraph edits.
    ExtractEdits {
        #[arg(long)]
        papers: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print edits as inline `[+ added +]` / `[- deleted -]` diffs.
    RenderDiff {
        #[arg(long)]
        edits: PathBuf,
        /// Only this paper.
        #[arg(long)]
        doc: Option<String>,
        /// Only this edit (requires --doc).
        #[arg(long, requires = "doc")]
        edit: Option<usize>,
    },
    /// Derive comment-edit labels from quoted review text in author responses.
    SilverAlign {
        #[arg(long)]
        papers: PathBuf,
        #[arg(long)]
        reviews: PathBuf,
        #[arg(long)]
        responses: PathBuf,
        #[arg(long)]
        edits: PathBuf,
        /// Directory for comments.jsonl, alignments.jsonl and diagnostics.
        #[arg(long)]
        out_dir: PathBuf,
        /// Measure reply overlap against the full paragraph instead of only
        /// its changed tokens.
        #[arg(long)]
        full_text: bool,
    },
    /// Build training pairs: labelled positives plus sampled negatives.
    BuildTrain {
        #[arg(long)]
        comments: PathBuf,
        #[arg(long)]
        alignments: PathBuf,
        #[arg(long)]
        edits: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NEGATIVES)]
        negatives: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score comments against their paper's edits and label the test split.
    Bm25(Bm25Args),
    /// Micro/macro metrics with bootstrap confidence intervals.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        edits: PathBuf,
        #[arg(long, default_value_t = 1000)]
        bootstrap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Corpus, edit and comment-overlap statistics.
    Stats {
        #[arg(long)]
        papers: PathBuf,
        #[arg(long)]
        edits: PathBuf,
        /// `NAME=COMMENTS,ALIGNMENTS`; repeatable.
        #[arg(long = "group", value_parser = parse_group)]
        groups: Vec<(String, PathBuf, PathBuf)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the stages listed in a JSON config.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct Bm25Args {
    #[arg(long)]
    edits: PathBuf,
    #[arg(long)]
    comments: PathBuf,
    #[arg(long)]
    alignments: PathBuf,
    /// Indexed text: target, diff or source.
    #[arg(long, default_value = "target")]
    mode: CandidateMode,
    /// Threshold objective: f1 or recall90.
    #[arg(long, default_value = "f1")]
    tune: TuneObjective,
    #[arg(long, default_value_t = 0.5)]
    dev_fraction: f64,
    /// Fixed threshold; disables tuning.
    #[arg(long, allow_negative_numbers = true)]
    threshold: Option<f64>,
    #[arg(long, default_value_t = 1.5)]
    k1: f64,
    #[arg(long, default_value_t = 0.75)]
    b: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Where to save the threshold; defaults next to --out.
    #[arg(long)]
    threshold_out: Option<PathBuf>,
}

fn parse_group(s: &str) -> Result<(String, PathBuf, PathBuf), String> {
    let (name, files) = s
        .split_once('=')
        .ok_or("expected NAME=COMMENTS,ALIGNMENTS")?;
    let (c, a) = files
        .split_once(',')
        .ok_or("expected NAME=COMMENTS,ALIGNMENTS")?;
    Ok((name.to_owned(), c.into(), a.into()))
}

/// Stamp for outputs of a single command: hash of its name and arguments.
fn meta(stage: &str, args: &serde_json::Value, seed: u64) -> Meta {
    let key = serde_json::json!({ "stage": stage, "args": args });
    Meta {
        config_hash: sha256_hex(key.to_string().as_bytes()),
        seed,
        stage: stage.to_owned(),
    }
}

fn path_json(p: &Path) -> serde_json::Value {
    serde_json::Value::String(p.display().to_string())
}

fn read_edits(path: &Path) -> Result<BTreeMap<String, Vec<Edit>>, CorpusError> {
    Ok(edits_from_records(read_records::<EditRecord>(path)?))
}

fn papers_only(papers: &Path) -> CorpusPaths {
    CorpusPaths {
        papers: papers.to_owned(),
        ..CorpusPaths::default()
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::ExtractEdits { papers, out } => {
            let corpus = load_corpus(&papers_only(&papers))?;
            let edits = corpus.extract_edits();
            let m = meta(
                "extract-edits",
                &serde_json::json!({ "papers": path_json(&papers) }),
                0,
            );
            write_jsonl(&out, Some(&m), &edit_records(&edits))?;
            eprintln!(
                "{} edits from {} papers -> {}",
                edits.values().map(Vec::len).sum::<usize>(),
                edits.len(),
                out.display()
            );
        }
        Command::RenderDiff { edits, doc, edit } => {
            let edits = read_edits(&edits)?;
            let mut stdout = std::io::stdout().lock();
            for (d, es) in &edits {
                if doc.as_ref().is_some_and(|want| want != d) {
                    continue;
                }
                for e in es.iter().filter(|e| edit.is_none_or(|id| id == e.edit_id)) {
                    writeln!(
                        stdout,
                        "## {d}#{} [{}]\n{}\n",
                        e.edit_id,
                        e.category.as_str(),
                        e.render()
                    )?;
                }
            }
        }
        Command::SilverAlign {
            papers,
            reviews,
            responses,
            edits,
            out_dir,
            full_text,
        } => {
            let corpus = load_corpus(&CorpusPaths {
                papers: papers.clone(),
                reviews: Some(reviews.clone()),
                responses: Some(responses.clone()),
                comments: None,
            })?;
            let edits_map = read_edits(&edits)?;
            let cfg = SilverConfig {
                reply_target: if full_text {
                    ReplyTarget::FullText
                } else {
                    ReplyTarget::ChangedText
                },
                ..SilverConfig::default()
            };
            let data = build_silver_dataset(&corpus.bundles(&edits_map), &cfg);
            let args = serde_json::json!({
                "papers": path_json(&papers), "reviews": path_json(&reviews),
                "responses": path_json(&responses), "edits": path_json(&edits), "config": cfg,
            });
            let m = meta("silver-align", &args, 0);
            write_jsonl(&out_dir.join("comments.jsonl"), Some(&m), &data.comments)?;
            write_jsonl(&out_dir.join("alignments.jsonl"), Some(&m), &data.labels)?;
            write_json(
                &out_dir.join("silver_diagnostics.json"),
                Some(&m),
                &data.diagnostics,
            )?;
            eprintln!("{}", serde_json::to_string_pretty(&data.diagnostics)?);
        }
        Command::BuildTrain {
            comments,
            alignments,
            edits,
            negatives,
            seed,
            out,
        } => {
            let edits_map = read_edits(&edits)?;
            let known = edits_map.keys().cloned().collect();
            let cs = load_comments(&comments, &known)?;
            let labels = load_alignments(&alignments, &edits_map)?;
            let pairs = build_training_pairs(&labels, &cs, &edits_map, negatives, seed)?;
            let args = serde_json::json!({
                "comments": path_json(&comments), "alignments": path_json(&alignments),
                "edits": path_json(&edits), "negatives": negatives,
            });
            write_jsonl(&out, Some(&meta("build-train", &args, seed)), &pairs)?;
            eprintln!("{} training pairs -> {}", pairs.len(), out.display());
        }
        Command::Bm25(a) => {
            let edits_map = read_edits(&a.edits)?;
            let known = edits_map.keys().cloned().collect();
            let cs: Vec<ReviewComment> = load_comments(&a.comments, &known)?;
            let labels: Vec<AlignmentLabel> = load_alignments(&a.alignments, &edits_map)?;
            let cfg = Bm25StageConfig {
                mode: a.mode,
                objective: a.tune,
                dev_fraction: a.dev_fraction,
                params: Bm25Params { k1: a.k1, b: a.b },
                threshold: a.threshold,
            };
            anyhow::ensure!(
                (0.0..1.0).contains(&cfg.dev_fraction),
                "--dev-fraction must lie in [0, 1)"
            );
            let (predictions, artifact) = run_bm25(&edits_map, &cs, &labels, &cfg, a.seed)?;
            let args = serde_json::json!({
                "edits": path_json(&a.edits), "comments": path_json(&a.comments),
                "alignments": path_json(&a.alignments), "config": cfg,
            });
            let m = meta("bm25", &args, a.seed);
            write_jsonl(&a.out, Some(&m), &predictions)?;
            let thr = a
                .threshold_out
                .unwrap_or_else(|| a.out.with_file_name("bm25_config.json"));
            write_json(&thr, Some(&m), &artifact)?;
            eprintln!(
                "threshold {} ; {} scored pairs -> {}",
                artifact.threshold.threshold,
                predictions.len(),
                a.out.display()
            );
        }
        Command::Evaluate {
            predictions,
            gold,
            edits,
            bootstrap,
            seed,
            out,
        } => {
            let edits_map = read_edits(&edits)?;
            let preds: Vec<PredictionRecord> = read_records(&predictions)?;
            let labels = load_alignments(&gold, &edits_map)?;
            let report = evaluate(&pair_set(&preds, &labels, &edits_map)?, bootstrap, seed)?;
            let args = serde_json::json!({
                "predictions": path_json(&predictions), "gold": path_json(&gold),
                "edits": path_json(&edits), "bootstrap": bootstrap,
            });
            write_json(&out, Some(&meta("evaluate", &args, seed)), &report)?;
            print!("{}", format_table("BM25", &report));
        }
        Command::Stats {
            papers,
            edits,
            groups,
            out,
        } => {
            let corpus = load_corpus(&papers_only(&papers))?;
            let edits_map = read_edits(&edits)?;
            let known = corpus.doc_ids();
            let mut loaded = Vec::new();
            for (name, c, a) in &groups {
                loaded.push((
                    name.as_str(),
                    load_comments(c, &known)?,
                    load_alignments(a, &edits_map)?,
                ));
            }
            let label_groups: Vec<LabelGroup<'_>> = loaded
                .iter()
                .map(|(n, c, l)| LabelGroup {
                    name: n,
                    comments: c,
                    labels: l,
                })
                .collect();
            let stats = compute_stats(corpus.papers.len(), &edits_map, &label_groups);
            let args =
                serde_json::json!({ "papers": path_json(&papers), "edits": path_json(&edits) });
            write_json(&out, Some(&meta("stats", &args, 0)), &stats)?;
            println!("{}", serde_json::to_string_pretty(&stats)?);
        }
        Command::Pipeline { config } => {
            let cfg = PipelineConfig::load(&config)?;
            let outcome = run_pipeline(&cfg)?;
            for p in outcome.artifacts {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

/// 2 when a required input or upstream artifact is missing, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<PipelineError>() {
        return e.exit_code() as u8;
    }
    match err.downcast_ref::<CorpusError>() {
        Some(CorpusError::MissingInput { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command).context("revalign failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
