//! Readers and writers for the UTF-8 file formats: JSON-lines corpus and
//! labels files, stop-word/lexicon/trigger tables, and the feature-matrix
//! CSV export. Built-in defaults for the three data tables ship with the
//! repository and are embedded at compile time.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use cqa_core::corpus::{validate_corpus, Label, QAThread};
use cqa_core::features::{FeatureVector, FEATURE_COUNT};
use cqa_core::lexicon::ConceptLexicon;
use cqa_core::pipeline::AnswerRank;
use cqa_core::question::TriggerTable;
use cqa_core::textproc::StopList;

use crate::error::{CliError, CliResult};

pub const DEFAULT_STOPWORDS: &str = include_str!("../../../data/stopwords.txt");
pub const DEFAULT_LEXICON: &str = include_str!("../../../data/lexicon.tsv");
pub const DEFAULT_TRIGGERS: &str = include_str!("../../../data/triggers.tsv");

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Loads a JSON-lines corpus. Whitespace-only lines are skipped; malformed
/// lines are reported with their 1-based line number; duplicate or empty
/// thread ids and threads with several best answers are rejected.
pub fn load_corpus(path: &Path) -> CliResult<Vec<QAThread>> {
    let contents = read(path)?;
    let mut threads = Vec::new();
    for (idx, line) in contents.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let thread: QAThread = serde_json::from_str(line).map_err(|e| {
            CliError::Input(format!("{} line {}: {e}", path.display(), idx + 1))
        })?;
        threads.push(thread);
    }
    validate_corpus(&threads).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(threads)
}

pub fn save_corpus(path: &Path, threads: &[QAThread]) -> CliResult<()> {
    let mut out = String::new();
    for thread in threads {
        out.push_str(&serde_json::to_string(thread).expect("corpus serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// One annotation row of the labels file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRow {
    pub qp_id: String,
    pub qt_id: String,
    pub answer_rank: u8,
    pub label: Label,
}

impl LabelRow {
    pub fn rank(&self) -> CliResult<AnswerRank> {
        AnswerRank::try_from(self.answer_rank).map_err(CliError::Input)
    }
}

/// Loads a JSON-lines labels file mirroring the annotation schema:
/// `qp_id`, `qt_id`, `answer_rank` (1 or 2), `label` (valid|invalid).
pub fn load_labels(path: &Path) -> CliResult<Vec<LabelRow>> {
    let contents = read(path)?;
    let mut rows = Vec::new();
    for (idx, line) in contents.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: LabelRow = serde_json::from_str(line).map_err(|e| {
            CliError::Input(format!("{} line {}: {e}", path.display(), idx + 1))
        })?;
        row.rank()
            .map_err(|e| CliError::Input(format!("{} line {}: {e}", path.display(), idx + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn save_labels(path: &Path, rows: &[LabelRow]) -> CliResult<()> {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).expect("label row serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_stopwords(path: Option<&Path>) -> CliResult<StopList> {
    let contents = match path {
        Some(p) => read(p)?,
        None => DEFAULT_STOPWORDS.to_string(),
    };
    StopList::parse(&contents).map_err(|e| CliError::Input(e.to_string()))
}

pub fn load_lexicon(path: Option<&Path>) -> CliResult<ConceptLexicon> {
    let contents = match path {
        Some(p) => read(p)?,
        None => DEFAULT_LEXICON.to_string(),
    };
    ConceptLexicon::parse(&contents).map_err(|e| CliError::Input(e.to_string()))
}

pub fn load_triggers(path: Option<&Path>) -> CliResult<TriggerTable> {
    let contents = match path {
        Some(p) => read(p)?,
        None => DEFAULT_TRIGGERS.to_string(),
    };
    TriggerTable::parse(&contents).map_err(|e| CliError::Input(e.to_string()))
}

/// Writes the labeled feature matrix: header `f1..f13,label`, one row per
/// labeled triplet.
pub fn write_feature_csv(path: &Path, rows: &[(FeatureVector, Label)]) -> CliResult<()> {
    let mut file = fs::File::create(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = (1..=FEATURE_COUNT).map(|i| format!("f{i}")).collect();
    writeln!(file, "{},label", header.join(","))
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    for (features, label) in rows {
        let cells: Vec<String> = features.as_array().iter().map(|v| format!("{v}")).collect();
        writeln!(file, "{},{label}", cells.join(","))
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
