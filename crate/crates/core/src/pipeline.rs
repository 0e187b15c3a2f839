//! Phase-one orchestration: bucket the archive by question class, search a
//! prospective question's bucket with both distance measures, and extract the
//! top-2 questions x 2 answers into candidate triplets. Also the end-to-end
//! answer path through a trained model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{select_answers, validate_corpus, Label, QAThread};
use crate::error::{Error, Result};
use crate::features::featurize;
use crate::learn::{predict_proba, RankModel};
use crate::lexicon::{default_treatment_types, recognize, shares_typed_concept, ConceptLexicon, ConceptSet};
use crate::question::{extract_subquestions, QuestionClass, SubQuestion, TriggerTable};
use crate::similarity::{apply_concept_weight, dtw_distance, fit_vsm, vs_distance, Distance, Measure, VectorSpaceModel};
use crate::textproc::{tokenize, StopList, TokenSeq};

/// Closest questions taken per measure, giving up to
/// 2 measures x 2 questions x 2 answers = 8 candidates.
pub const DEFAULT_CANDIDATES_PER_MEASURE: usize = 2;

/// Thread id attached to ad-hoc query questions so archive exclusion never
/// matches a real thread.
pub const QUERY_THREAD_ID: &str = "__query__";

/// Which of a thread's two retained answers a triplet carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum AnswerRank {
    Best,
    Second,
}

impl AnswerRank {
    pub fn as_u8(self) -> u8 {
        match self {
            AnswerRank::Best => 1,
            AnswerRank::Second => 2,
        }
    }
}

impl From<AnswerRank> for u8 {
    fn from(rank: AnswerRank) -> u8 {
        rank.as_u8()
    }
}

impl TryFrom<u8> for AnswerRank {
    type Error = String;

    fn try_from(value: u8) -> core::result::Result<Self, String> {
        match value {
            1 => Ok(AnswerRank::Best),
            2 => Ok(AnswerRank::Second),
            other => Err(format!("answer rank must be 1 or 2, got {other}")),
        }
    }
}

impl fmt::Display for AnswerRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// One classification unit: a prospective question paired with an archive
/// question and one of its answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub qp: SubQuestion,
    pub qt: SubQuestion,
    pub answer_text: String,
    pub answer_rank: AnswerRank,
    pub distance: Distance,
    pub label: Option<Label>,
    pub score: Option<f64>,
}

impl Triplet {
    pub fn measure(&self) -> Measure {
        self.distance.measure
    }
}

/// An archived answer with its recognized concept terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub text: String,
    pub tokens: TokenSeq,
    pub concepts: ConceptSet,
}

impl AnswerRecord {
    fn new(text: &str, lexicon: &ConceptLexicon) -> Self {
        let tokens = tokenize(text);
        let concepts = recognize(&tokens, lexicon);
        AnswerRecord {
            text: text.to_string(),
            tokens,
            concepts,
        }
    }
}

/// One archive question with the best and (when present) second answer of its
/// source thread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub question: SubQuestion,
    pub question_concepts: ConceptSet,
    pub best: AnswerRecord,
    pub second: Option<AnswerRecord>,
}

/// All archive questions of one class plus the vector-space model fitted over
/// them. The prospective question is folded in at query time with the archive
/// idf rather than refitting per query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassBucket {
    pub class: QuestionClass,
    pub entries: Vec<ArchiveEntry>,
    pub vsm: VectorSpaceModel,
}

/// The sub-questions extracted from one corpus thread, kept for replaying
/// every thread as a prospective question during training-set generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadSubQuestions {
    pub id: String,
    pub subquestions: Vec<SubQuestion>,
}

/// The searchable candidate index: per-class archive buckets, the lexicon and
/// trigger table used to build them, and every thread's sub-questions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateIndex {
    threads: Vec<ThreadSubQuestions>,
    buckets: Vec<ClassBucket>,
    lexicon: ConceptLexicon,
    triggers: TriggerTable,
    treatment_types: BTreeSet<String>,
}

impl CandidateIndex {
    pub fn bucket(&self, class: QuestionClass) -> Option<&ClassBucket> {
        self.buckets.iter().find(|b| b.class == class)
    }

    pub fn buckets(&self) -> &[ClassBucket] {
        &self.buckets
    }

    pub fn threads(&self) -> &[ThreadSubQuestions] {
        &self.threads
    }

    pub fn lexicon(&self) -> &ConceptLexicon {
        &self.lexicon
    }

    pub fn triggers(&self) -> &TriggerTable {
        &self.triggers
    }

    pub fn contains_thread(&self, id: &str) -> bool {
        self.threads.iter().any(|t| t.id == id)
    }

    pub fn archive_thread_ids(&self) -> BTreeSet<&str> {
        self.buckets
            .iter()
            .flat_map(|b| b.entries.iter())
            .map(|e| e.question.source_thread.as_str())
            .collect()
    }

    /// Question count per class, zero-filled for empty classes.
    pub fn bucket_sizes(&self) -> Vec<(QuestionClass, usize)> {
        QuestionClass::ALL
            .iter()
            .map(|class| {
                let size = self
                    .bucket(*class)
                    .map(|b| b.entries.len())
                    .unwrap_or(0);
                (*class, size)
            })
            .collect()
    }
}

/// Builds the candidate index: extract and classify sub-questions, bucket the
/// resolvable threads' questions by class, fit a per-class vector-space model,
/// and precompute concept sets for questions and answers.
pub fn build_index(
    corpus: &[QAThread],
    lexicon: ConceptLexicon,
    triggers: TriggerTable,
) -> Result<CandidateIndex> {
    validate_corpus(corpus)?;

    let mut threads = Vec::with_capacity(corpus.len());
    let mut per_class: BTreeMap<QuestionClass, Vec<ArchiveEntry>> = BTreeMap::new();

    for thread in corpus {
        let subs = extract_subquestions(&thread.id, &thread.title, &thread.description, &triggers);
        if thread.best_answer().is_some() {
            let pair = select_answers(thread)?;
            for sub in &subs {
                let entry = ArchiveEntry {
                    question_concepts: recognize(&sub.tokens, &lexicon),
                    question: sub.clone(),
                    best: AnswerRecord::new(&pair.best_answer.text, &lexicon),
                    second: pair
                        .second_answer
                        .as_ref()
                        .map(|a| AnswerRecord::new(&a.text, &lexicon)),
                };
                per_class.entry(sub.class).or_default().push(entry);
            }
        }
        threads.push(ThreadSubQuestions {
            id: thread.id.clone(),
            subquestions: subs,
        });
    }

    if per_class.values().all(Vec::is_empty) {
        return Err(Error::NoResolvableThreads);
    }

    let buckets = per_class
        .into_iter()
        .map(|(class, entries)| {
            let vsm = fit_vsm(entries.iter().map(|e| &e.question.tokens));
            ClassBucket { class, entries, vsm }
        })
        .collect();

    Ok(CandidateIndex {
        threads,
        buckets,
        lexicon,
        triggers,
        treatment_types: default_treatment_types(),
    })
}

/// Searches the prospective question's class bucket with both measures and
/// emits the best and second answer of the `per_measure` closest questions:
/// up to `2 * per_measure * 2` triplets, fewer when the bucket is small or
/// second answers are absent. The same question reached by both measures is
/// retained once per measure. Equal distances break toward the smaller
/// thread id. An empty or missing bucket yields an empty list.
pub fn extract_candidates(
    qp: &SubQuestion,
    index: &CandidateIndex,
    weight: f64,
    per_measure: usize,
) -> Result<Vec<Triplet>> {
    if !(weight > 0.0 && weight <= 1.0) {
        return Err(Error::InvalidWeight(weight));
    }
    let Some(bucket) = index.bucket(qp.class) else {
        return Ok(Vec::new());
    };
    if qp.tokens.is_empty() {
        return Ok(Vec::new());
    }

    let candidates: Vec<(usize, &ArchiveEntry)> = bucket
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.question.source_thread != qp.source_thread)
        .collect();
    if candidates.is_empty() {
        return Ok(Vec::new());
    }

    let qp_concepts = recognize(&qp.tokens, &index.lexicon);
    let mut out = Vec::new();

    for measure in [Measure::Dtw, Measure::Vs] {
        let mut scored: Vec<(f64, usize)> = Vec::with_capacity(candidates.len());
        for (idx, entry) in &candidates {
            let raw = match measure {
                Measure::Dtw => dtw_distance(&qp.tokens, &entry.question.tokens)?,
                Measure::Vs => vs_distance(&bucket.vsm, &qp.tokens, &entry.question.tokens),
            };
            let shares =
                shares_typed_concept(&qp_concepts, &entry.question_concepts, &index.treatment_types);
            let weighted = apply_concept_weight(Distance { value: raw, measure }, shares, weight)?;
            scored.push((weighted.value, *idx));
        }
        scored.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| {
                    bucket.entries[a.1]
                        .question
                        .source_thread
                        .cmp(&bucket.entries[b.1].question.source_thread)
                })
                .then(a.1.cmp(&b.1))
        });
        for &(value, idx) in scored.iter().take(per_measure) {
            let entry = &bucket.entries[idx];
            let distance = Distance { value, measure };
            out.push(Triplet {
                qp: qp.clone(),
                qt: entry.question.clone(),
                answer_text: entry.best.text.clone(),
                answer_rank: AnswerRank::Best,
                distance,
                label: None,
                score: None,
            });
            if let Some(second) = &entry.second {
                out.push(Triplet {
                    qp: qp.clone(),
                    qt: entry.question.clone(),
                    answer_text: second.text.clone(),
                    answer_rank: AnswerRank::Second,
                    distance,
                    label: None,
                    score: None,
                });
            }
        }
    }
    Ok(out)
}

/// Replays every corpus thread as a prospective question and pools its
/// candidates. Rows that re-reach the same `(Q_p, Q_t, answer)` combination
/// (the two measures often agree) are kept once, first measure wins.
pub fn generate_training_triplets(
    index: &CandidateIndex,
    weight: f64,
    per_measure: usize,
) -> Result<Vec<Triplet>> {
    let mut out = Vec::new();
    for thread in &index.threads {
        let mut seen = BTreeSet::new();
        for sub in &thread.subquestions {
            for triplet in extract_candidates(sub, index, weight, per_measure)? {
                let key = (
                    triplet.qp.text.clone(),
                    triplet.qt.source_thread.clone(),
                    triplet.qt.text.clone(),
                    triplet.answer_rank,
                );
                if seen.insert(key) {
                    out.push(triplet);
                }
            }
        }
    }
    Ok(out)
}

/// One line of the ranked output of [`answer`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAnswer {
    pub text: String,
    pub probability: f64,
    pub source_thread: String,
    pub answer_rank: AnswerRank,
}

/// End-to-end answer path: extract sub-questions, pool their candidates,
/// score each triplet with the model, drop everything below the model's
/// threshold, deduplicate by `(Q_t, answer)` keeping the best score, and rank
/// by descending probability. An empty result means "no valid answer".
pub fn answer(
    title: &str,
    description: &str,
    index: &CandidateIndex,
    model: &RankModel,
    stops: &StopList,
    weight: f64,
) -> Result<Vec<RankedAnswer>> {
    let subs = extract_subquestions(QUERY_THREAD_ID, title, description, &index.triggers);
    let mut best: BTreeMap<(String, String, AnswerRank), (f64, String)> = BTreeMap::new();

    for sub in &subs {
        for triplet in extract_candidates(sub, index, weight, DEFAULT_CANDIDATES_PER_MEASURE)? {
            let features = featurize(&triplet, index, stops);
            let score = predict_proba(model, &features);
            if score < model.threshold {
                continue;
            }
            let key = (
                triplet.qt.source_thread.clone(),
                triplet.qt.text.clone(),
                triplet.answer_rank,
            );
            let entry = best.entry(key).or_insert((score, triplet.answer_text.clone()));
            if score > entry.0 {
                *entry = (score, triplet.answer_text.clone());
            }
        }
    }

    let mut ranked: Vec<RankedAnswer> = best
        .into_iter()
        .map(|((thread, _qt_text, rank), (probability, text))| RankedAnswer {
            text,
            probability,
            source_thread: thread,
            answer_rank: rank,
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.probability
            .total_cmp(&a.probability)
            .then_with(|| a.source_thread.cmp(&b.source_thread))
            .then(a.answer_rank.cmp(&b.answer_rank))
    });
    Ok(ranked)
}
