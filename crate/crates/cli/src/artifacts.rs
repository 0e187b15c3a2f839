//! Versioned persistence for the candidate index and trained models. Files
//! are JSON with an explicit `version` tag; an unknown version is an error,
//! never a silent reinterpretation.

use std::fs;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use cqa_core::learn::RankModel;
use cqa_core::pipeline::CandidateIndex;

use crate::error::{CliError, CliResult};

pub const INDEX_VERSION: u32 = 1;
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct IndexFile {
    version: u32,
    index: CandidateIndex,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    model: RankModel,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut body = serde_json::to_string(value)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    body.push('\n');
    fs::write(path, body).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_versioned<T: DeserializeOwned>(path: &Path, expected: u32, what: &str) -> CliResult<T> {
    let contents = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&contents)
        .map_err(|e| CliError::Input(format!("{}: malformed {what} file: {e}", path.display())))?;
    let version = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| {
            CliError::Input(format!("{}: {what} file has no version tag", path.display()))
        })?;
    if version != u64::from(expected) {
        return Err(CliError::Input(format!(
            "{}: unsupported {what} version {version} (expected {expected})",
            path.display()
        )));
    }
    serde_json::from_value(value)
        .map_err(|e| CliError::Input(format!("{}: malformed {what} file: {e}", path.display())))
}

pub fn save_index(path: &Path, index: &CandidateIndex) -> CliResult<()> {
    write_json(
        path,
        &IndexFile {
            version: INDEX_VERSION,
            index: index.clone(),
        },
    )
}

pub fn load_index(path: &Path) -> CliResult<CandidateIndex> {
    let file: IndexFile = read_versioned(path, INDEX_VERSION, "index")?;
    Ok(file.index)
}

pub fn save_model(path: &Path, model: &RankModel) -> CliResult<()> {
    write_json(
        path,
        &ModelFile {
            version: MODEL_VERSION,
            model: model.clone(),
        },
    )
}

pub fn load_model(path: &Path) -> CliResult<RankModel> {
    let file: ModelFile = read_versioned(path, MODEL_VERSION, "model")?;
    Ok(file.model)
}
