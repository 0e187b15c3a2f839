//! Domain-concept recognition over token sequences via a term-to-semantic-type
//! lexicon, plus the shared-treatment-concept test used to reweight distances.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::{tokenize, TokenSeq};

/// Longest phrase (in tokens) the recognizer will try to match.
pub const MAX_PHRASE_TOKENS: usize = 5;

/// Semantic types that mark a concept as treatment-related.
pub const DEFAULT_TREATMENT_TYPES: [&str; 2] = ["organic chemical", "pharmacologic substance"];

pub fn default_treatment_types() -> BTreeSet<String> {
    DEFAULT_TREATMENT_TYPES.iter().map(|s| s.to_string()).collect()
}

/// Map from lowercase (possibly multi-word) terms to their semantic types.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptLexicon {
    entries: BTreeMap<String, BTreeSet<String>>,
    max_tokens: usize,
}

impl ConceptLexicon {
    pub fn new<I, T, Y>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, Y)>,
        T: AsRef<str>,
        Y: IntoIterator,
        Y::Item: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        let mut max_tokens = 0usize;
        for (term, types) in entries {
            let normalized = tokenize(term.as_ref());
            if normalized.is_empty() {
                return Err(Error::InvalidLexicon {
                    line: 0,
                    reason: format!("term `{}` normalizes to nothing", term.as_ref()),
                });
            }
            if normalized.len() > MAX_PHRASE_TOKENS {
                return Err(Error::InvalidLexicon {
                    line: 0,
                    reason: format!(
                        "term `{}` exceeds {MAX_PHRASE_TOKENS} tokens",
                        term.as_ref()
                    ),
                });
            }
            let types: BTreeSet<String> = types
                .into_iter()
                .map(|t| t.as_ref().trim().to_lowercase())
                .filter(|t| !t.is_empty())
                .collect();
            if types.is_empty() {
                return Err(Error::InvalidLexicon {
                    line: 0,
                    reason: format!("term `{}` has no semantic types", term.as_ref()),
                });
            }
            max_tokens = max_tokens.max(normalized.len());
            map.entry(normalized.joined())
                .or_insert_with(BTreeSet::new)
                .extend(types);
        }
        Ok(ConceptLexicon {
            entries: map,
            max_tokens,
        })
    }

    /// Parses the `term <TAB> type[;type...]` file format. Blank lines and
    /// `#` comment lines are skipped.
    pub fn parse(contents: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in contents.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (term, types) = line.split_once('\t').ok_or_else(|| Error::InvalidLexicon {
                line: line_no,
                reason: "expected `term<TAB>type[;type...]`".into(),
            })?;
            let types: Vec<String> = types
                .split(';')
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .collect();
            if types.is_empty() {
                return Err(Error::InvalidLexicon {
                    line: line_no,
                    reason: format!("term `{term}` has no semantic types"),
                });
            }
            entries.push((term.to_string(), types));
        }
        ConceptLexicon::new(entries).map_err(|e| match e {
            Error::InvalidLexicon { reason, .. } => Error::InvalidLexicon { line: 0, reason },
            other => other,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn types_of(&self, term: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(term)
    }

    /// All semantic types named by the lexicon, always including the
    /// treatment types the distance reweighting relies on.
    pub fn type_vocabulary(&self) -> BTreeSet<String> {
        let mut vocabulary = default_treatment_types();
        for types in self.entries.values() {
            vocabulary.extend(types.iter().cloned());
        }
        vocabulary
    }
}

/// Concept terms recognized in one token sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptSet {
    types_by_term: BTreeMap<String, BTreeSet<String>>,
}

impl ConceptSet {
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.types_by_term.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.types_by_term.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types_by_term.is_empty()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.types_by_term.contains_key(term)
    }

    pub fn types_of(&self, term: &str) -> Option<&BTreeSet<String>> {
        self.types_by_term.get(term)
    }

    /// Terms present in both sets.
    pub fn overlap(&self, other: &ConceptSet) -> BTreeSet<String> {
        self.types_by_term
            .keys()
            .filter(|t| other.contains(t))
            .cloned()
            .collect()
    }

    pub fn overlap_count(&self, other: &ConceptSet) -> usize {
        self.types_by_term
            .keys()
            .filter(|t| other.contains(t))
            .count()
    }

    /// Number of terms in exactly one of the two sets.
    pub fn symmetric_difference_count(&self, other: &ConceptSet) -> usize {
        let shared = self.overlap_count(other);
        (self.len() - shared) + (other.len() - shared)
    }
}

/// Greedy longest-match recognition, left to right over token n-grams
/// (n up to [`MAX_PHRASE_TOKENS`]). Matched spans never overlap.
pub fn recognize(seq: &TokenSeq, lexicon: &ConceptLexicon) -> ConceptSet {
    let tokens = seq.tokens();
    let mut set = ConceptSet::default();
    if lexicon.is_empty() {
        return set;
    }
    let longest = lexicon.max_tokens.min(MAX_PHRASE_TOKENS);
    let mut i = 0;
    while i < tokens.len() {
        let limit = longest.min(tokens.len() - i);
        let mut advanced = false;
        for n in (1..=limit).rev() {
            let candidate = tokens[i..i + n].join(" ");
            if let Some(types) = lexicon.types_of(&candidate) {
                set.types_by_term.insert(candidate, types.clone());
                i += n;
                advanced = true;
                break;
            }
        }
        if !advanced {
            i += 1;
        }
    }
    set
}

/// True when some term recognized in both sets carries one of the qualifying
/// semantic types.
pub fn shares_typed_concept(a: &ConceptSet, b: &ConceptSet, qualifying: &BTreeSet<String>) -> bool {
    a.types_by_term.iter().any(|(term, types)| {
        b.contains(term) && types.iter().any(|t| qualifying.contains(t))
    })
}

/// [`shares_typed_concept`] with the default treatment-type set.
pub fn shares_treatment_concept(a: &ConceptSet, b: &ConceptSet) -> bool {
    shares_typed_concept(a, b, &default_treatment_types())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexicon(entries: &[(&str, &[&str])]) -> ConceptLexicon {
        ConceptLexicon::new(entries.iter().map(|(t, y)| (*t, y.iter().copied()))).unwrap()
    }

    #[test]
    fn single_term_hit() {
        let lex = lexicon(&[("chlordiazepoxide", &["pharmacologic substance"])]);
        let set = recognize(&tokenize("chlordiazepoxide has been the standard drug"), &lex);
        assert_eq!(set.len(), 1);
        assert!(set.contains("chlordiazepoxide"));
    }

    #[test]
    fn empty_lexicon_recognizes_nothing() {
        let set = recognize(&tokenize("alcohol withdrawal"), &ConceptLexicon::default());
        assert!(set.is_empty());
    }

    #[test]
    fn longest_match_shadows_shorter_entry() {
        let lex = lexicon(&[
            ("alcohol", &["organic chemical"]),
            ("alcohol withdrawal", &["mental or behavioral dysfunction"]),
        ]);
        let set = recognize(&tokenize("alcohol withdrawal symptoms"), &lex);
        assert!(set.contains("alcohol withdrawal"));
        assert!(!set.contains("alcohol"));
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn shared_treatment_term_qualifies() {
        let lex = lexicon(&[
            ("chlordiazepoxide", &["pharmacologic substance"]),
            ("anxiety", &["sign or symptom"]),
        ]);
        let a = recognize(&tokenize("chlordiazepoxide for anxiety"), &lex);
        let b = recognize(&tokenize("they prescribed chlordiazepoxide"), &lex);
        assert!(shares_treatment_concept(&a, &b));
    }

    #[test]
    fn shared_symptom_term_does_not_qualify() {
        // only the two treatment types qualify
        let lex = lexicon(&[("anxiety", &["sign or symptom"])]);
        let a = recognize(&tokenize("anxiety medication"), &lex);
        let b = recognize(&tokenize("my anxiety is worse"), &lex);
        assert!(a.contains("anxiety") && b.contains("anxiety"));
        assert!(!shares_treatment_concept(&a, &b));
    }

    #[test]
    fn disjoint_sets_share_nothing() {
        let lex = lexicon(&[
            ("naltrexone", &["pharmacologic substance"]),
            ("valium", &["pharmacologic substance"]),
        ]);
        let a = recognize(&tokenize("naltrexone dosage"), &lex);
        let b = recognize(&tokenize("valium dosage"), &lex);
        assert!(!shares_treatment_concept(&a, &b));
    }

    #[test]
    fn symmetric_difference_counts() {
        let lex = lexicon(&[
            ("a", &["pharmacologic substance"]),
            ("b", &["pharmacologic substance"]),
            ("c", &["pharmacologic substance"]),
        ]);
        let x = recognize(&tokenize("a b"), &lex);
        let y = recognize(&tokenize("b c"), &lex);
        assert_eq!(x.overlap_count(&y), 1);
        assert_eq!(x.symmetric_difference_count(&y), 2);
    }

    #[test]
    fn growing_the_lexicon_keeps_matches_unless_shadowed() {
        let seq = tokenize("take naltrexone for alcohol cravings");
        let small = lexicon(&[("naltrexone", &["pharmacologic substance"])]);
        let before = recognize(&seq, &small);
        // a new single-token entry adds a match without removing any
        let grown = lexicon(&[
            ("naltrexone", &["pharmacologic substance"]),
            ("alcohol", &["organic chemical"]),
        ]);
        let after = recognize(&seq, &grown);
        assert!(before.terms().all(|t| after.contains(t)));
        assert!(after.contains("alcohol"));
        // a longer entry may shadow a shorter one it covers
        let shadowing = lexicon(&[
            ("alcohol", &["organic chemical"]),
            ("alcohol cravings", &["sign or symptom"]),
        ]);
        let shadowed = recognize(&seq, &shadowing);
        assert!(shadowed.contains("alcohol cravings"));
        assert!(!shadowed.contains("alcohol"));
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        assert!(ConceptLexicon::parse("term without tab\n").is_err());
        assert!(ConceptLexicon::parse("term\t\n").is_err());
        let ok = ConceptLexicon::parse("# comment\nvalium\tpharmacologic substance;organic chemical\n")
            .unwrap();
        assert_eq!(ok.len(), 1);
        assert_eq!(ok.types_of("valium").unwrap().len(), 2);
    }

    #[test]
    fn overlong_terms_are_rejected() {
        assert!(ConceptLexicon::new([("one two three four five six", ["x"])]).is_err());
    }
}
