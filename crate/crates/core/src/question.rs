//! Sub-question extraction from thread titles/descriptions and keyword-based
//! routing into the 13 question classes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::{tokenize, TokenSeq};

/// The 13 question classes. Every sentence maps to exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuestionClass {
    YesNo,
    WhatQuantity,
    HowFrequent,
    When,
    Why,
    How,
    Where,
    Who,
    Whose,
    Whom,
    What,
    Which,
    Others,
}

impl QuestionClass {
    pub const ALL: [QuestionClass; 13] = [
        QuestionClass::YesNo,
        QuestionClass::WhatQuantity,
        QuestionClass::HowFrequent,
        QuestionClass::When,
        QuestionClass::Why,
        QuestionClass::How,
        QuestionClass::Where,
        QuestionClass::Who,
        QuestionClass::Whose,
        QuestionClass::Whom,
        QuestionClass::What,
        QuestionClass::Which,
        QuestionClass::Others,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QuestionClass::YesNo => "yes-no",
            QuestionClass::WhatQuantity => "what-quantity",
            QuestionClass::HowFrequent => "how-frequent",
            QuestionClass::When => "when",
            QuestionClass::Why => "why",
            QuestionClass::How => "how",
            QuestionClass::Where => "where",
            QuestionClass::Who => "who",
            QuestionClass::Whose => "whose",
            QuestionClass::Whom => "whom",
            QuestionClass::What => "what",
            QuestionClass::Which => "which",
            QuestionClass::Others => "others",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for QuestionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Auxiliary verbs that mark a sentence as Yes-No when no interrogative
/// trigger occurs anywhere in it.
pub const AUXILIARIES: [&str; 18] = [
    "is", "are", "was", "were", "do", "does", "did", "can", "could", "will", "would", "should",
    "has", "have", "had", "may", "might", "am",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Trigger {
    tokens: Vec<String>,
    class: QuestionClass,
}

/// Phrase-to-class trigger table. Matching is token-based: the earliest
/// occurrence in the sentence wins, and at equal positions a longer phrase
/// beats its shorter prefix ("how often" before "how").
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerTable {
    triggers: Vec<Trigger>,
}

impl TriggerTable {
    /// The canonical trigger set.
    pub fn builtin() -> Self {
        let entries: &[(QuestionClass, &str)] = &[
            (QuestionClass::WhatQuantity, "what quantity"),
            (QuestionClass::WhatQuantity, "how much"),
            (QuestionClass::WhatQuantity, "how many"),
            (QuestionClass::HowFrequent, "how often"),
            (QuestionClass::HowFrequent, "how frequent"),
            (QuestionClass::HowFrequent, "how frequently"),
            (QuestionClass::When, "when"),
            (QuestionClass::Why, "why"),
            (QuestionClass::How, "how"),
            (QuestionClass::Where, "where"),
            (QuestionClass::Who, "who"),
            (QuestionClass::Whose, "whose"),
            (QuestionClass::Whom, "whom"),
            (QuestionClass::What, "what"),
            (QuestionClass::Which, "which"),
        ];
        TriggerTable {
            triggers: entries
                .iter()
                .map(|(class, phrase)| Trigger {
                    tokens: tokenize(phrase).tokens().to_vec(),
                    class: *class,
                })
                .collect(),
        }
    }

    /// Parses the `class <TAB> trigger phrase` file format. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse(contents: &str) -> Result<Self> {
        let mut triggers = Vec::new();
        for (idx, line) in contents.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (class_name, phrase) =
                line.split_once('\t')
                    .ok_or_else(|| Error::InvalidTriggerTable {
                        line: line_no,
                        reason: "expected `class<TAB>phrase`".into(),
                    })?;
            let class = QuestionClass::from_name(class_name.trim()).ok_or_else(|| {
                Error::InvalidTriggerTable {
                    line: line_no,
                    reason: format!("unknown class `{}`", class_name.trim()),
                }
            })?;
            let tokens = tokenize(phrase).tokens().to_vec();
            if tokens.is_empty() {
                return Err(Error::InvalidTriggerTable {
                    line: line_no,
                    reason: "empty trigger phrase".into(),
                });
            }
            triggers.push(Trigger { tokens, class });
        }
        if triggers.is_empty() {
            return Err(Error::InvalidTriggerTable {
                line: 0,
                reason: "no triggers defined".into(),
            });
        }
        Ok(TriggerTable { triggers })
    }

    pub fn len(&self) -> usize {
        self.triggers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triggers.is_empty()
    }

    fn phrase_at(tokens: &[String], phrase: &[String], pos: usize) -> bool {
        tokens.len() >= pos + phrase.len()
            && phrase
                .iter()
                .zip(&tokens[pos..pos + phrase.len()])
                .all(|(p, t)| p == t)
    }

    /// Earliest-position match; at the same position the longest phrase wins.
    fn find_first(&self, tokens: &[String]) -> Option<&Trigger> {
        let mut best: Option<(usize, &Trigger)> = None;
        for trigger in &self.triggers {
            let positions = 0..tokens.len();
            for pos in positions {
                if Self::phrase_at(tokens, &trigger.tokens, pos) {
                    best = match best {
                        None => Some((pos, trigger)),
                        Some((bpos, bt)) => {
                            if pos < bpos
                                || (pos == bpos && trigger.tokens.len() > bt.tokens.len())
                            {
                                Some((pos, trigger))
                            } else {
                                Some((bpos, bt))
                            }
                        }
                    };
                    break;
                }
            }
        }
        best.map(|(_, t)| t)
    }

    fn starts_with_trigger(&self, tokens: &[String]) -> bool {
        self.triggers
            .iter()
            .any(|t| Self::phrase_at(tokens, &t.tokens, 0))
    }
}

impl Default for TriggerTable {
    fn default() -> Self {
        Self::builtin()
    }
}

/// A short extracted question sentence routed to its class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubQuestion {
    pub text: String,
    pub tokens: TokenSeq,
    pub class: QuestionClass,
    pub source_thread: String,
}

/// Routes a sentence to its question class. Total and deterministic:
/// earliest trigger wins, then the auxiliary rule, then `others`.
pub fn classify(sentence: &str, table: &TriggerTable) -> QuestionClass {
    classify_tokens(&tokenize(sentence), table)
}

fn classify_tokens(tokens: &TokenSeq, table: &TriggerTable) -> QuestionClass {
    if let Some(trigger) = table.find_first(tokens.tokens()) {
        return trigger.class;
    }
    match tokens.tokens().first() {
        Some(first) if AUXILIARIES.contains(&first.as_str()) => QuestionClass::YesNo,
        _ => QuestionClass::Others,
    }
}

/// Splits `title` + `description` into sentences (boundaries `.`, `?`, `!`,
/// newline) and keeps those that end with `?` or begin with a trigger phrase
/// or auxiliary. When nothing qualifies the title itself becomes the single
/// sub-question so the thread stays answerable.
pub fn extract_subquestions(
    thread_id: &str,
    title: &str,
    description: &str,
    table: &TriggerTable,
) -> Vec<SubQuestion> {
    let mut combined = String::with_capacity(title.len() + description.len() + 1);
    combined.push_str(title);
    combined.push('\n');
    combined.push_str(description);

    let mut subs = Vec::new();
    for (sentence, terminator) in split_sentences(&combined) {
        let tokens = tokenize(&sentence);
        if tokens.is_empty() {
            continue;
        }
        let qualifies = terminator == Some('?')
            || table.starts_with_trigger(tokens.tokens())
            || tokens
                .tokens()
                .first()
                .is_some_and(|t| AUXILIARIES.contains(&t.as_str()));
        if qualifies {
            let class = classify_tokens(&tokens, table);
            subs.push(SubQuestion {
                text: sentence,
                tokens,
                class,
                source_thread: thread_id.to_string(),
            });
        }
    }

    if subs.is_empty() {
        let tokens = tokenize(title);
        if !tokens.is_empty() {
            let class = classify_tokens(&tokens, table);
            subs.push(SubQuestion {
                text: title.trim().to_string(),
                tokens,
                class,
                source_thread: thread_id.to_string(),
            });
        }
    }
    subs
}

/// Sentences with their boundary character. The terminator is kept in the
/// sentence text except for newlines.
fn split_sentences(text: &str) -> Vec<(String, Option<char>)> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut push = |buf: &mut String, terminator: Option<char>| {
        let trimmed = buf.trim();
        if !trimmed.is_empty() {
            let mut sentence = trimmed.to_string();
            if let Some(t) = terminator {
                sentence.push(t);
            }
            out.push((sentence, terminator));
        }
        buf.clear();
    };
    for ch in text.chars() {
        match ch {
            '.' | '?' | '!' => push(&mut current, Some(ch)),
            '\n' => push(&mut current, None),
            _ => current.push(ch),
        }
    }
    push(&mut current, None);
    out
}
