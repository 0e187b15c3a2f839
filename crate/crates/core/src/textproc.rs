//! Text primitives shared by every distance and feature computation:
//! tokenization, stop-word counting, and character-level edit distance.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered sequence of normalized tokens: lowercase, whitespace-split,
/// with leading/trailing punctuation stripped (internal punctuation such as
/// `/` is preserved, so `drug/alcohol` stays one token).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSeq {
    tokens: Vec<String>,
}

impl TokenSeq {
    /// Wraps tokens that are already normalized. [`tokenize`] is the
    /// canonical constructor for raw text.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TokenSeq {
            tokens: tokens.into_iter().map(Into::into).collect(),
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Space-joined form; `tokenize(seq.joined())` reproduces `seq`.
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

/// The canonical tokenizer: lowercase, split on whitespace, strip leading and
/// trailing non-alphanumeric characters from each token, drop tokens that
/// become empty.
pub fn tokenize(text: &str) -> TokenSeq {
    let tokens = text
        .split_whitespace()
        .filter_map(|raw| {
            let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
            if trimmed.is_empty() {
                None
            } else {
                Some(trimmed.to_lowercase())
            }
        })
        .collect();
    TokenSeq { tokens }
}

/// Words whose presence the stop list must guarantee; without them the
/// stop-word feature counts are meaningless for English questions.
pub const REQUIRED_STOPWORDS: [&str; 5] = ["is", "a", "for", "and", "the"];

/// A set of lowercase stop words.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StopList {
    words: BTreeSet<String>,
}

impl StopList {
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words: BTreeSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() {
            return Err(Error::InvalidStopList("stop list is empty".into()));
        }
        for required in REQUIRED_STOPWORDS {
            if !words.contains(required) {
                return Err(Error::InvalidStopList(format!(
                    "missing required stop word `{required}`"
                )));
            }
        }
        Ok(StopList { words })
    }

    /// Parses the shipped file format: one word per line, `#` starts a comment.
    pub fn parse(contents: &str) -> Result<Self> {
        let words = contents
            .lines()
            .map(|line| line.split('#').next().unwrap_or("").trim())
            .filter(|w| !w.is_empty())
            .map(str::to_owned)
            .collect::<Vec<_>>();
        StopList::new(words)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Number of tokens in `seq` that are members of `stops`.
pub fn count_stopwords(seq: &TokenSeq, stops: &StopList) -> usize {
    seq.tokens().iter().filter(|t| stops.contains(t)).count()
}

/// Character-level Levenshtein distance with unit costs for insertion,
/// deletion, and substitution (no transpositions).
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }

    // rolling single-row DP
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            let substitution = diag + usize::from(ca != cb);
            row[j + 1] = substitution.min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    const QP: &str = "anxiety medication for drug/alcohol addiction?";
    const QT: &str =
        "Is chlordiazepoxide/librium a good medication for alcohol withdrawal and the associated anxiety?";

    fn stops() -> StopList {
        StopList::new(["is", "a", "for", "and", "the", "of", "in", "to"]).unwrap()
    }

    #[test]
    fn tokenize_keeps_internal_slash() {
        let seq = tokenize(QP);
        assert_eq!(seq.len(), 5);
        assert!(seq.tokens().contains(&"drug/alcohol".to_string()));
        assert_eq!(seq.tokens().last().unwrap(), "addiction");
    }

    #[test]
    fn tokenize_counts_match_worked_example() {
        assert_eq!(tokenize(QP).len(), 5);
        assert_eq!(tokenize(QT).len(), 12);
    }

    #[test]
    fn tokenize_empty_is_empty() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  ?!  ...  ").is_empty());
    }

    #[test]
    fn stopword_counts_match_worked_example() {
        let stops = stops();
        assert_eq!(count_stopwords(&tokenize(QP), &stops), 1);
        assert_eq!(count_stopwords(&tokenize(QT), &stops), 5);
        assert_eq!(count_stopwords(&TokenSeq::default(), &stops), 0);
    }

    #[test]
    fn stoplist_enforces_required_words() {
        assert!(StopList::new(Vec::<String>::new()).is_err());
        assert!(StopList::new(["is", "a", "for", "and"]).is_err());
        assert!(StopList::new(REQUIRED_STOPWORDS).is_ok());
    }

    #[test]
    fn stoplist_parse_skips_comments() {
        let list = StopList::parse("# header\nis\na\nfor # inline\nand\nthe\n\n").unwrap();
        assert_eq!(list.len(), 5);
        assert!(list.contains("for"));
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }
}
