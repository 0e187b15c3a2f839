//! Flag parsing and configuration resolution. Precedence: command-line flags
//! override config-file values override built-in defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use cqa_core::learn::ClassifierKind;

use crate::commands::{
    AnswerOptions, CandidatesOptions, EvaluateOptions, IngestOptions, Mode, TrainOptions,
};
use crate::error::{CliError, CliResult};

pub const DEFAULT_WEIGHT: f64 = 0.5;
pub const DEFAULT_ITERATIONS: usize = 1;
pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_RUNS: usize = 1;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "cqa",
    version,
    about = "Answer community questions from an archive of resolved threads"
)]
pub struct Cli {
    /// TOML config file; flags override file values, file values override defaults
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Build the candidate index from a JSON-lines corpus
    Ingest(IngestArgs),
    /// Dump candidate triplets for one question as JSON lines
    Candidates(CandidatesArgs),
    /// Train a ranking model from an index and a labels file
    Train(TrainArgs),
    /// Cross-validate a configuration and write metric reports
    Evaluate(EvaluateArgs),
    /// Answer a question with a trained model
    Answer(AnswerArgs),
}

#[derive(Args)]
pub struct IngestArgs {
    /// Corpus file (JSON lines)
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Concept lexicon file (default: built-in starter lexicon)
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Trigger table file (default: built-in table)
    #[arg(long)]
    pub triggers: Option<PathBuf>,
    /// Output index path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CandidatesArgs {
    /// The question text to search for
    #[arg(conflicts_with = "thread", required_unless_present = "thread")]
    pub question: Option<String>,
    /// Replay an existing corpus thread by id instead of free text
    #[arg(long)]
    pub thread: Option<String>,
    /// Candidate index produced by `ingest`
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Concept weight in (0, 1]
    #[arg(long)]
    pub weight: Option<f64>,
    /// Write candidates to a file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Candidate index produced by `ingest`
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Labels file (JSON lines)
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Stop-word list (default: built-in list)
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Classifier kind
    #[arg(long, value_parser = ["log", "nnet", "nnet_l2", "svm"])]
    pub classifier: Option<String>,
    /// Training mode
    #[arg(long, value_parser = ["supervised", "em"])]
    pub mode: Option<String>,
    /// EM iterations
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Unlabeled rows sampled per EM iteration (default: the whole pool)
    #[arg(long)]
    pub subset_size: Option<usize>,
    /// Concept weight in (0, 1]
    #[arg(long)]
    pub weight: Option<f64>,
    /// Seed for all randomness
    #[arg(long)]
    pub seed: Option<u64>,
    /// Decision threshold override in (0, 1); default: F1-maximizing sweep
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Output model path
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also export the labeled feature matrix as CSV
    #[arg(long)]
    pub features_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Candidate index produced by `ingest`
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Labels file (JSON lines)
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Stop-word list (default: built-in list)
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Classifier kind
    #[arg(long, value_parser = ["log", "nnet", "nnet_l2", "svm"])]
    pub classifier: Option<String>,
    /// Training mode
    #[arg(long, value_parser = ["supervised", "em"])]
    pub mode: Option<String>,
    /// EM iterations
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Unlabeled rows sampled per EM iteration (default: the whole pool)
    #[arg(long)]
    pub subset_size: Option<usize>,
    /// Concept weight in (0, 1]
    #[arg(long)]
    pub weight: Option<f64>,
    /// Cross-validation folds
    #[arg(long)]
    pub folds: Option<usize>,
    /// Repeated runs with derived seeds
    #[arg(long)]
    pub runs: Option<usize>,
    /// Seed for all randomness
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output report path; `.json` and `.txt` extensions are appended
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also export the labeled feature matrix as CSV
    #[arg(long)]
    pub features_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct AnswerArgs {
    /// Question title
    pub title: String,
    /// Question description
    #[arg(default_value = "")]
    pub description: String,
    /// Candidate index produced by `ingest`
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Trained model produced by `train`
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Stop-word list (default: built-in list)
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Concept weight in (0, 1]
    #[arg(long)]
    pub weight: Option<f64>,
}

/// Config-file counterpart of the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub corpus: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub triggers: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub features_out: Option<PathBuf>,
    pub weight: Option<f64>,
    pub classifier: Option<String>,
    pub mode: Option<String>,
    pub iterations: Option<usize>,
    pub subset_size: Option<usize>,
    pub folds: Option<usize>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let contents = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
                toml::from_str(&contents)
                    .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
            }
        }
    }
}

fn require(name: &str, value: Option<PathBuf>) -> CliResult<PathBuf> {
    value.ok_or_else(|| CliError::Input(format!("missing required path: --{name}")))
}

fn validate_weight(weight: f64) -> CliResult<f64> {
    if weight > 0.0 && weight <= 1.0 {
        Ok(weight)
    } else {
        Err(CliError::Input(format!(
            "--weight must lie in (0, 1], got {weight}"
        )))
    }
}

fn validate_threshold(threshold: Option<f64>) -> CliResult<Option<f64>> {
    match threshold {
        Some(t) if !(t > 0.0 && t < 1.0) => Err(CliError::Input(format!(
            "--threshold must lie in (0, 1), got {t}"
        ))),
        other => Ok(other),
    }
}

fn parse_classifier(value: Option<String>) -> CliResult<ClassifierKind> {
    let name = value.unwrap_or_else(|| "nnet_l2".to_string());
    ClassifierKind::from_str(&name).map_err(|e| CliError::Input(e.to_string()))
}

fn parse_mode(value: Option<String>) -> CliResult<Mode> {
    match value.as_deref() {
        None | Some("supervised") => Ok(Mode::Supervised),
        Some("em") => Ok(Mode::Em),
        Some(other) => Err(CliError::Input(format!(
            "unknown mode `{other}` (expected supervised or em)"
        ))),
    }
}

fn validate_iterations(iterations: usize) -> CliResult<usize> {
    if iterations >= 1 {
        Ok(iterations)
    } else {
        Err(CliError::Input("--iterations must be at least 1".into()))
    }
}

fn validate_folds(folds: usize) -> CliResult<usize> {
    if folds >= 2 {
        Ok(folds)
    } else {
        Err(CliError::Input("--folds must be at least 2".into()))
    }
}

impl IngestArgs {
    pub fn resolve(self, file: &FileConfig) -> CliResult<IngestOptions> {
        Ok(IngestOptions {
            corpus: require("corpus", self.corpus.or_else(|| file.corpus.clone()))?,
            lexicon: self.lexicon.or_else(|| file.lexicon.clone()),
            triggers: self.triggers.or_else(|| file.triggers.clone()),
            out: self
                .out
                .or_else(|| file.out.clone())
                .unwrap_or_else(|| PathBuf::from("index.json")),
        })
    }
}

impl CandidatesArgs {
    pub fn resolve(self, file: &FileConfig) -> CliResult<CandidatesOptions> {
        Ok(CandidatesOptions {
            index: require("index", self.index.or_else(|| file.index.clone()))?,
            weight: validate_weight(self.weight.or(file.weight).unwrap_or(DEFAULT_WEIGHT))?,
            question: self.question,
            thread: self.thread,
            out: self.out.or_else(|| file.out.clone()),
        })
    }
}

impl TrainArgs {
    pub fn resolve(self, file: &FileConfig) -> CliResult<TrainOptions> {
        Ok(TrainOptions {
            index: require("index", self.index.or_else(|| file.index.clone()))?,
            labels: require("labels", self.labels.or_else(|| file.labels.clone()))?,
            stopwords: self.stopwords.or_else(|| file.stopwords.clone()),
            classifier: parse_classifier(self.classifier.or_else(|| file.classifier.clone()))?,
            mode: parse_mode(self.mode.or_else(|| file.mode.clone()))?,
            iterations: validate_iterations(
                self.iterations.or(file.iterations).unwrap_or(DEFAULT_ITERATIONS),
            )?,
            subset_size: self.subset_size.or(file.subset_size),
            weight: validate_weight(self.weight.or(file.weight).unwrap_or(DEFAULT_WEIGHT))?,
            seed: self.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            threshold: validate_threshold(self.threshold.or(file.threshold))?,
            out: self
                .out
                .or_else(|| file.out.clone())
                .unwrap_or_else(|| PathBuf::from("model.json")),
            features_out: self.features_out.or_else(|| file.features_out.clone()),
            hyper: Default::default(),
        })
    }
}

impl EvaluateArgs {
    pub fn resolve(self, file: &FileConfig) -> CliResult<EvaluateOptions> {
        Ok(EvaluateOptions {
            index: require("index", self.index.or_else(|| file.index.clone()))?,
            labels: require("labels", self.labels.or_else(|| file.labels.clone()))?,
            stopwords: self.stopwords.or_else(|| file.stopwords.clone()),
            classifier: parse_classifier(self.classifier.or_else(|| file.classifier.clone()))?,
            mode: parse_mode(self.mode.or_else(|| file.mode.clone()))?,
            iterations: validate_iterations(
                self.iterations.or(file.iterations).unwrap_or(DEFAULT_ITERATIONS),
            )?,
            subset_size: self.subset_size.or(file.subset_size),
            weight: validate_weight(self.weight.or(file.weight).unwrap_or(DEFAULT_WEIGHT))?,
            folds: validate_folds(self.folds.or(file.folds).unwrap_or(DEFAULT_FOLDS))?,
            runs: self.runs.or(file.runs).unwrap_or(DEFAULT_RUNS).max(1),
            seed: self.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            out: self
                .out
                .or_else(|| file.out.clone())
                .unwrap_or_else(|| PathBuf::from("report")),
            features_out: self.features_out.or_else(|| file.features_out.clone()),
            hyper: Default::default(),
        })
    }
}

impl AnswerArgs {
    pub fn resolve(self, file: &FileConfig) -> CliResult<AnswerOptions> {
        Ok(AnswerOptions {
            index: require("index", self.index.or_else(|| file.index.clone()))?,
            model: require("model", self.model.or_else(|| file.model.clone()))?,
            stopwords: self.stopwords.or_else(|| file.stopwords.clone()),
            weight: validate_weight(self.weight.or(file.weight).unwrap_or(DEFAULT_WEIGHT))?,
            title: self.title,
            description: self.description,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = FileConfig {
            weight: Some(0.3),
            index: Some(PathBuf::from("file-index.json")),
            ..Default::default()
        };
        let args = CandidatesArgs {
            question: Some("q".into()),
            thread: None,
            index: Some(PathBuf::from("flag-index.json")),
            weight: None,
            out: None,
        };
        let opts = args.resolve(&file).unwrap();
        assert_eq!(opts.index, PathBuf::from("flag-index.json"));
        assert_eq!(opts.weight, 0.3);
    }

    #[test]
    fn defaults_fill_remaining_gaps() {
        let args = CandidatesArgs {
            question: Some("q".into()),
            thread: None,
            index: Some(PathBuf::from("i.json")),
            weight: None,
            out: None,
        };
        let opts = args.resolve(&FileConfig::default()).unwrap();
        assert_eq!(opts.weight, DEFAULT_WEIGHT);
    }

    #[test]
    fn invalid_ranges_are_input_errors() {
        let args = CandidatesArgs {
            question: Some("q".into()),
            thread: None,
            index: Some(PathBuf::from("i.json")),
            weight: Some(1.5),
            out: None,
        };
        let err = args.resolve(&FileConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let err = toml::from_str::<FileConfig>("bogus = 1").unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }
}
