//! The two question-distance measures: word-sequence alignment (DTW with a
//! character-Levenshtein inner distance) and tf-idf Euclidean distance, plus
//! concept-based distance reweighting.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::{levenshtein, TokenSeq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Dtw,
    Vs,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Dtw => "dtw",
            Measure::Vs => "vs",
        })
    }
}

/// A nonnegative distance tagged with the measure that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    pub value: f64,
    pub measure: Measure,
}

/// Word-sequence alignment distance. `f(i,j) = d(a_i, b_j) + min(f(i-1,j),
/// f(i,j-1), f(i-1,j-1))` with `f(0,0) = 0` and infinite borders, so every
/// alignment path is anchored at the first word pair. The inner distance `d`
/// is unnormalized character-level Levenshtein.
pub fn dtw_distance(a: &TokenSeq, b: &TokenSeq) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySequence);
    }
    let a = a.tokens();
    let b = b.tokens();

    let mut prev = vec![f64::INFINITY; b.len() + 1];
    let mut row = vec![f64::INFINITY; b.len() + 1];
    prev[0] = 0.0;
    for wa in a {
        row[0] = f64::INFINITY;
        for (j, wb) in b.iter().enumerate() {
            let cost = levenshtein(wa, wb) as f64;
            row[j + 1] = cost + prev[j + 1].min(row[j]).min(prev[j]);
        }
        std::mem::swap(&mut prev, &mut row);
    }
    Ok(prev[b.len()])
}

/// Unigram tf-idf model over a fixed document collection. Dimensions are
/// assigned contiguously in sorted vocabulary order; `idf = ln(N / df)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VectorSpaceModel {
    vocabulary: BTreeMap<String, usize>,
    idf: Vec<f64>,
    document_count: usize,
}

impl VectorSpaceModel {
    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn document_count(&self) -> usize {
        self.document_count
    }

    pub fn idf(&self, token: &str) -> Option<f64> {
        self.vocabulary.get(token).map(|&dim| self.idf[dim])
    }

    /// Sparse tf-idf vector; out-of-vocabulary tokens contribute nothing.
    fn tfidf(&self, seq: &TokenSeq) -> BTreeMap<usize, f64> {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for token in seq.tokens() {
            if let Some(&dim) = self.vocabulary.get(token) {
                *counts.entry(dim).or_insert(0.0) += 1.0;
            }
        }
        for (dim, value) in counts.iter_mut() {
            *value *= self.idf[*dim];
        }
        counts
    }
}

/// Fits a tf-idf model: vocabulary is the union of tokens, term frequency is
/// the raw in-document count, `idf = ln(N / df)`. An empty collection yields
/// the empty model (all query vectors are then zero).
pub fn fit_vsm<'a, I>(documents: I) -> VectorSpaceModel
where
    I: IntoIterator<Item = &'a TokenSeq>,
{
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    let mut document_count = 0usize;
    for doc in documents {
        document_count += 1;
        let mut seen = std::collections::BTreeSet::new();
        for token in doc.tokens() {
            if seen.insert(token.as_str()) {
                *df.entry(token.clone()).or_insert(0) += 1;
            }
        }
    }
    let mut vocabulary = BTreeMap::new();
    let mut idf = Vec::with_capacity(df.len());
    for (dim, (token, df)) in df.into_iter().enumerate() {
        vocabulary.insert(token, dim);
        idf.push((document_count as f64 / df as f64).ln());
    }
    VectorSpaceModel {
        vocabulary,
        idf,
        document_count,
    }
}

/// Euclidean distance between the tf-idf vectors of two token sequences.
pub fn vs_distance(model: &VectorSpaceModel, a: &TokenSeq, b: &TokenSeq) -> f64 {
    let va = model.tfidf(a);
    let vb = model.tfidf(b);
    let mut sum = 0.0;
    for (dim, value) in &va {
        let diff = value - vb.get(dim).copied().unwrap_or(0.0);
        sum += diff * diff;
    }
    for (dim, value) in &vb {
        if !va.contains_key(dim) {
            sum += value * value;
        }
    }
    sum.sqrt()
}

/// Scales a distance down by `weight` when the two texts share a treatment
/// concept. A weight above 1 would penalize the shared concept instead, so
/// only `(0, 1]` is accepted.
pub fn apply_concept_weight(d: Distance, shares: bool, weight: f64) -> Result<Distance> {
    if !(weight > 0.0 && weight <= 1.0) {
        return Err(Error::InvalidWeight(weight));
    }
    Ok(Distance {
        value: if shares { d.value * weight } else { d.value },
        measure: d.measure,
    })
}
