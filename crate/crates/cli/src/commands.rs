//! The five subcommands: ingest, candidates, train, evaluate, answer.
//! Command functions are plain library calls so tests can drive them without
//! spawning the binary; `main` only parses flags and maps errors to exit
//! codes.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use cqa_core::corpus::Label;
use cqa_core::eval::{cross_validate, LabeledGroup, MetricReport, TrainMode};
use cqa_core::features::{feature_information_gains, featurize, FeatureVector};
use cqa_core::learn::{
    predict_proba, train_em, train_supervised, ClassifierKind, Hyperparams, LabeledSet,
};
use cqa_core::pipeline::{
    answer, build_index, extract_candidates, generate_training_triplets, CandidateIndex,
    Triplet, DEFAULT_CANDIDATES_PER_MEASURE, QUERY_THREAD_ID,
};
use cqa_core::question::extract_subquestions;
use cqa_core::textproc::StopList;

use crate::artifacts;
use crate::error::{CliError, CliResult};
use crate::formats::{self, LabelRow};

/// Evaluation mode shared by train and evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Supervised,
    Em,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Supervised => "supervised",
            Mode::Em => "em",
        })
    }
}

// ------------------------------------------------------------------ ingest

#[derive(Debug)]
pub struct IngestOptions {
    pub corpus: PathBuf,
    pub lexicon: Option<PathBuf>,
    pub triggers: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn cmd_ingest(opts: &IngestOptions) -> CliResult<()> {
    let corpus = formats::load_corpus(&opts.corpus)?;
    let lexicon = formats::load_lexicon(opts.lexicon.as_deref())?;
    let triggers = formats::load_triggers(opts.triggers.as_deref())?;
    let index = build_index(&corpus, lexicon, triggers).map_err(|e| match e {
        cqa_core::Error::NoResolvableThreads => CliError::Input(format!(
            "{}: no resolvable threads (every thread lacks a best answer)",
            opts.corpus.display()
        )),
        other => CliError::from(other),
    })?;
    artifacts::save_index(&opts.out, &index)?;

    let archive_total: usize = index.bucket_sizes().iter().map(|(_, n)| n).sum();
    println!(
        "ingested {} threads into {} archive questions ({} buckets)",
        index.threads().len(),
        archive_total,
        index.bucket_sizes().len()
    );
    for (class, size) in index.bucket_sizes() {
        println!("  {class:<14} {size}");
    }
    println!("index written to {}", opts.out.display());
    Ok(())
}

// -------------------------------------------------------------- candidates

#[derive(Debug)]
pub struct CandidatesOptions {
    pub index: PathBuf,
    pub weight: f64,
    /// Ad-hoc question text, or with `thread` set, the id of a corpus thread
    /// to replay (its own archive entries are excluded from the search).
    pub question: Option<String>,
    pub thread: Option<String>,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CandidateRow<'a> {
    qp_id: &'a str,
    qp: &'a str,
    qp_class: String,
    measure: String,
    distance: f64,
    qt_id: &'a str,
    qt: &'a str,
    answer_rank: u8,
    answer: &'a str,
}

fn candidate_row<'a>(triplet: &'a Triplet) -> CandidateRow<'a> {
    CandidateRow {
        qp_id: &triplet.qp.source_thread,
        qp: &triplet.qp.text,
        qp_class: triplet.qp.class.to_string(),
        measure: triplet.measure().to_string(),
        distance: triplet.distance.value,
        qt_id: &triplet.qt.source_thread,
        qt: &triplet.qt.text,
        answer_rank: triplet.answer_rank.as_u8(),
        answer: &triplet.answer_text,
    }
}

pub fn cmd_candidates(opts: &CandidatesOptions) -> CliResult<()> {
    let index = artifacts::load_index(&opts.index)?;
    let subs = match (&opts.question, &opts.thread) {
        (Some(question), None) => {
            extract_subquestions(QUERY_THREAD_ID, question, "", index.triggers())
        }
        (None, Some(id)) => index
            .threads()
            .iter()
            .find(|t| &t.id == id)
            .ok_or_else(|| CliError::Input(format!("unknown thread id `{id}`")))?
            .subquestions
            .clone(),
        _ => {
            return Err(CliError::Input(
                "provide either a question text or --thread <id>".into(),
            ))
        }
    };
    let mut lines = Vec::new();
    for sub in &subs {
        for triplet in extract_candidates(sub, &index, opts.weight, DEFAULT_CANDIDATES_PER_MEASURE)? {
            lines.push(
                serde_json::to_string(&candidate_row(&triplet)).expect("candidate row serializes"),
            );
        }
    }
    match &opts.out {
        Some(path) => {
            let mut body = lines.join("\n");
            if !body.is_empty() {
                body.push('\n');
            }
            std::fs::write(path, body)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        }
        None => {
            for line in &lines {
                println!("{line}");
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------- training data assembly

pub(crate) struct TrainingData {
    pub groups: Vec<LabeledGroup>,
    pub rows: Vec<(FeatureVector, Label)>,
    pub unlabeled: Vec<FeatureVector>,
    pub matched_label_rows: usize,
    pub unmatched_label_rows: usize,
}

/// Replays every thread as a prospective question, featurizes the pooled
/// candidate triplets, and splits them into labeled rows (keyed by
/// `(qp_id, qt_id, answer_rank)` from the labels file) and the unlabeled
/// remainder. Label rows naming unknown thread ids are configuration errors.
pub(crate) fn assemble_training_data(
    index: &CandidateIndex,
    stops: &StopList,
    label_rows: &[LabelRow],
    weight: f64,
) -> CliResult<TrainingData> {
    let archive_ids = index.archive_thread_ids();
    let mut wanted: BTreeMap<(String, String, u8), Label> = BTreeMap::new();
    for row in label_rows {
        if !index.contains_thread(&row.qp_id) {
            return Err(CliError::Config(format!(
                "labels reference unknown thread id `{}`",
                row.qp_id
            )));
        }
        if !archive_ids.contains(row.qt_id.as_str()) {
            return Err(CliError::Config(format!(
                "labels reference thread id `{}` which is not in the answer archive",
                row.qt_id
            )));
        }
        let key = (row.qp_id.clone(), row.qt_id.clone(), row.answer_rank);
        if let Some(previous) = wanted.insert(key, row.label) {
            if previous != row.label {
                return Err(CliError::Config(format!(
                    "conflicting labels for (qp `{}`, qt `{}`, rank {})",
                    row.qp_id, row.qt_id, row.answer_rank
                )));
            }
        }
    }

    let triplets = generate_training_triplets(index, weight, DEFAULT_CANDIDATES_PER_MEASURE)?;
    let mut matched_keys: BTreeMap<(String, String, u8), bool> = BTreeMap::new();
    let mut grouped: BTreeMap<String, Vec<(FeatureVector, Label)>> = BTreeMap::new();
    let mut unlabeled = Vec::new();

    for triplet in &triplets {
        let features = featurize(triplet, index, stops);
        let key = (
            triplet.qp.source_thread.clone(),
            triplet.qt.source_thread.clone(),
            triplet.answer_rank.as_u8(),
        );
        match wanted.get(&key) {
            Some(label) => {
                matched_keys.insert(key, true);
                grouped
                    .entry(triplet.qp.source_thread.clone())
                    .or_default()
                    .push((features, *label));
            }
            None => unlabeled.push(features),
        }
    }

    let matched = matched_keys.len();
    let unmatched = wanted.len() - matched;
    if unmatched > 0 {
        log::warn!("{unmatched} label rows matched no generated candidate triplet and were skipped");
    }

    // group order follows thread order in the index for determinism
    let mut groups = Vec::new();
    for thread in index.threads() {
        if let Some(rows) = grouped.remove(&thread.id) {
            groups.push(LabeledGroup {
                id: thread.id.clone(),
                rows,
            });
        }
    }
    let rows: Vec<(FeatureVector, Label)> = groups
        .iter()
        .flat_map(|g| g.rows.iter().copied())
        .collect();

    Ok(TrainingData {
        groups,
        rows,
        unlabeled,
        matched_label_rows: matched,
        unmatched_label_rows: unmatched,
    })
}

// ------------------------------------------------------------------- train

#[derive(Debug)]
pub struct TrainOptions {
    pub index: PathBuf,
    pub labels: PathBuf,
    pub stopwords: Option<PathBuf>,
    pub classifier: ClassifierKind,
    pub mode: Mode,
    pub iterations: usize,
    pub subset_size: Option<usize>,
    pub weight: f64,
    pub seed: u64,
    pub threshold: Option<f64>,
    pub out: PathBuf,
    pub features_out: Option<PathBuf>,
    pub hyper: Hyperparams,
}

pub fn cmd_train(opts: &TrainOptions) -> CliResult<()> {
    let index = artifacts::load_index(&opts.index)?;
    let stops = formats::load_stopwords(opts.stopwords.as_deref())?;
    let label_rows = formats::load_labels(&opts.labels)?;
    let data = assemble_training_data(&index, &stops, &label_rows, opts.weight)?;

    if data.rows.is_empty() {
        return Err(CliError::Config(
            "labels file produced no labeled triplets".into(),
        ));
    }
    let labeled = LabeledSet::new(data.rows.clone()).map_err(CliError::from)?;

    let model = match opts.mode {
        Mode::Supervised => {
            train_supervised(&labeled, opts.classifier, &opts.hyper, opts.seed)?
        }
        Mode::Em => train_em(
            &labeled,
            &data.unlabeled,
            opts.classifier,
            &opts.hyper,
            opts.iterations,
            opts.subset_size.unwrap_or(data.unlabeled.len()),
            opts.seed,
        )?,
    };

    let threshold = match opts.threshold {
        Some(t) => t,
        None => {
            let probs: Vec<f64> = labeled
                .rows()
                .iter()
                .map(|(f, _)| predict_proba(&model, f))
                .collect();
            let gold: Vec<Label> = labeled.rows().iter().map(|(_, l)| *l).collect();
            cqa_core::eval::select_threshold(&probs, &gold)?
        }
    };
    let model = model.with_threshold(threshold)?;

    artifacts::save_model(&opts.out, &model)?;
    if let Some(path) = &opts.features_out {
        formats::write_feature_csv(path, labeled.rows())?;
    }

    let valid = data.rows.iter().filter(|(_, l)| l.is_valid()).count();
    println!(
        "trained {} ({}) on {} labeled triplets ({} valid / {} invalid), {} unlabeled",
        opts.classifier,
        opts.mode,
        data.rows.len(),
        valid,
        data.rows.len() - valid,
        data.unlabeled.len()
    );
    println!("matched {} annotation keys", data.matched_label_rows);
    if data.unmatched_label_rows > 0 {
        println!(
            "warning: {} label rows matched no candidate triplet",
            data.unmatched_label_rows
        );
    }
    println!("threshold {threshold:.6}");
    println!("model written to {}", opts.out.display());
    Ok(())
}

// ---------------------------------------------------------------- evaluate

#[derive(Debug)]
pub struct EvaluateOptions {
    pub index: PathBuf,
    pub labels: PathBuf,
    pub stopwords: Option<PathBuf>,
    pub classifier: ClassifierKind,
    pub mode: Mode,
    pub iterations: usize,
    pub subset_size: Option<usize>,
    pub weight: f64,
    pub folds: usize,
    pub runs: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub features_out: Option<PathBuf>,
    pub hyper: Hyperparams,
}

#[derive(Serialize)]
struct EvaluateReport<'a> {
    classifier: String,
    mode: Mode,
    iterations: Option<usize>,
    folds: usize,
    runs: usize,
    seed: u64,
    weight: f64,
    labeled_triplets: usize,
    unlabeled_triplets: usize,
    question_groups: usize,
    metrics: &'a MetricReport,
    information_gain: &'a [(&'static str, f64)],
}

fn format_text_report(report: &EvaluateReport<'_>) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "classifier {}  mode {}  folds {}  runs {}  seed {}\n",
        report.classifier, report.mode, report.folds, report.runs, report.seed
    ));
    out.push_str(&format!(
        "labeled {}  unlabeled {}  groups {}\n\n",
        report.labeled_triplets, report.unlabeled_triplets, report.question_groups
    ));
    out.push_str(&format!("{:<18} {:>10} {:>10}\n", "metric", "mean", "std"));
    let rows = [
        ("overall_accuracy", report.metrics.overall_accuracy),
        ("mrr", report.metrics.mrr),
        ("f1", report.metrics.f1),
        ("precision", report.metrics.precision),
        ("recall", report.metrics.recall),
    ];
    for (name, summary) in rows {
        out.push_str(&format!(
            "{:<18} {:>10.4} {:>10.4}\n",
            name, summary.mean, summary.std
        ));
    }
    out.push_str("\ninformation gain (bits)\n");
    for (name, gain) in report.information_gain {
        out.push_str(&format!("{name:<20} {gain:>8.4}\n"));
    }
    out
}

pub fn cmd_evaluate(opts: &EvaluateOptions) -> CliResult<()> {
    let index = artifacts::load_index(&opts.index)?;
    let stops = formats::load_stopwords(opts.stopwords.as_deref())?;
    let label_rows = formats::load_labels(&opts.labels)?;
    let data = assemble_training_data(&index, &stops, &label_rows, opts.weight)?;
    if data.groups.is_empty() {
        return Err(CliError::Config(
            "labels file produced no labeled triplets".into(),
        ));
    }

    let mode = match opts.mode {
        Mode::Supervised => TrainMode::Supervised,
        Mode::Em => TrainMode::Em {
            iterations: opts.iterations,
            subset_size: opts.subset_size,
        },
    };
    let metrics = cross_validate(
        &data.groups,
        &data.unlabeled,
        opts.classifier,
        mode,
        &opts.hyper,
        opts.folds,
        opts.seed,
        opts.runs,
    )?;
    let gains = feature_information_gains(&data.rows, 10)?;

    let report = EvaluateReport {
        classifier: opts.classifier.to_string(),
        mode: opts.mode,
        iterations: match opts.mode {
            Mode::Em => Some(opts.iterations),
            Mode::Supervised => None,
        },
        folds: opts.folds,
        runs: opts.runs,
        seed: opts.seed,
        weight: opts.weight,
        labeled_triplets: data.rows.len(),
        unlabeled_triplets: data.unlabeled.len(),
        question_groups: data.groups.len(),
        metrics: &metrics,
        information_gain: &gains,
    };

    let json_path = opts.out.with_extension("json");
    let text_path = opts.out.with_extension("txt");
    let mut json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Input(format!("report serialization: {e}")))?;
    json.push('\n');
    std::fs::write(&json_path, json)
        .map_err(|e| CliError::Input(format!("{}: {e}", json_path.display())))?;
    let text = format_text_report(&report);
    std::fs::write(&text_path, &text)
        .map_err(|e| CliError::Input(format!("{}: {e}", text_path.display())))?;
    if let Some(path) = &opts.features_out {
        formats::write_feature_csv(path, &data.rows)?;
    }

    print!("{text}");
    println!("reports written to {} and {}", json_path.display(), text_path.display());
    Ok(())
}

// ------------------------------------------------------------------ answer

#[derive(Debug)]
pub struct AnswerOptions {
    pub index: PathBuf,
    pub model: PathBuf,
    pub stopwords: Option<PathBuf>,
    pub weight: f64,
    pub title: String,
    pub description: String,
}

pub fn cmd_answer(opts: &AnswerOptions) -> CliResult<()> {
    if opts.title.trim().is_empty() && opts.description.trim().is_empty() {
        return Err(CliError::Input("empty question".into()));
    }
    let index = artifacts::load_index(&opts.index)?;
    let model = artifacts::load_model(&opts.model)?;
    let stops = formats::load_stopwords(opts.stopwords.as_deref())?;
    let ranked = answer(
        &opts.title,
        &opts.description,
        &index,
        &model,
        &stops,
        opts.weight,
    )?;
    if ranked.is_empty() {
        println!("no valid answer");
    } else {
        for item in &ranked {
            println!("{:.4}\t{}", item.probability, item.text);
        }
    }
    Ok(())
}
