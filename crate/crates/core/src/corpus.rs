//! Community Q&A thread model and best/second answer selection.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A raw community thread: title, free-text description, and its answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAThread {
    pub id: String,
    pub title: String,
    pub description: String,
    pub answers: Vec<Answer>,
}

impl QAThread {
    pub fn best_answer(&self) -> Option<&Answer> {
        self.answers.iter().find(|a| a.is_best)
    }
}

/// One posted answer. Missing `likes` / `is_best` fields default to 0 / false.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub text: String,
    #[serde(default)]
    pub likes: u64,
    #[serde(default)]
    pub is_best: bool,
}

/// The best answer of a resolved thread plus, when other answers exist, the
/// runner-up by like count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedPair {
    pub thread_id: String,
    pub best_answer: Answer,
    pub second_answer: Option<Answer>,
}

/// Annotation label for a candidate triplet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Valid,
    Invalid,
}

impl Label {
    pub fn is_valid(self) -> bool {
        matches!(self, Label::Valid)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Valid => "valid",
            Label::Invalid => "invalid",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "valid" => Ok(Label::Valid),
            "invalid" => Ok(Label::Invalid),
            other => Err(Error::InvalidParameter(format!(
                "unknown label `{other}` (expected `valid` or `invalid`)"
            ))),
        }
    }
}

/// Picks the marked best answer and the non-best answer with the most likes.
/// Ties on like counts keep the first occurrence in thread order.
pub fn select_answers(thread: &QAThread) -> Result<ResolvedPair> {
    let mut best: Option<&Answer> = None;
    for answer in &thread.answers {
        if answer.is_best {
            if best.is_some() {
                return Err(Error::MultipleBestAnswers(thread.id.clone()));
            }
            best = Some(answer);
        }
    }
    let best = best.ok_or_else(|| Error::UnresolvedThread(thread.id.clone()))?;

    let mut second: Option<&Answer> = None;
    for answer in &thread.answers {
        if answer.is_best {
            continue;
        }
        match second {
            Some(current) if answer.likes <= current.likes => {}
            _ => second = Some(answer),
        }
    }

    Ok(ResolvedPair {
        thread_id: thread.id.clone(),
        best_answer: best.clone(),
        second_answer: second.cloned(),
    })
}

/// Structural validation shared by loaders: nonempty unique ids and at most
/// one best-marked answer per thread. Unresolved threads are legal here; they
/// are only excluded from the answer archive later.
pub fn validate_corpus(threads: &[QAThread]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for thread in threads {
        if thread.id.is_empty() {
            return Err(Error::EmptyThreadId);
        }
        if !seen.insert(thread.id.as_str()) {
            return Err(Error::DuplicateThreadId(thread.id.clone()));
        }
        if thread.answers.iter().filter(|a| a.is_best).count() > 1 {
            return Err(Error::MultipleBestAnswers(thread.id.clone()));
        }
    }
    Ok(())
}
