//! The 13-feature representation of a candidate triplet, plus the
//! information-gain analysis used to rank feature importance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::lexicon::recognize;
use crate::pipeline::{CandidateIndex, Triplet};
use crate::similarity::{dtw_distance, vs_distance, VectorSpaceModel};
use crate::textproc::{count_stopwords, tokenize, StopList, TokenSeq};

pub const FEATURE_COUNT: usize = 13;

/// Column names in feature order; also the CSV export header names.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "len_qp",
    "len_qt",
    "stops_qp",
    "stops_qt",
    "vs_qp_qt",
    "vs_diff",
    "dtw_qp_qt",
    "dtw_diff",
    "overlap_sp_st",
    "overlap_sp_sa",
    "overlap_sets_differ",
    "setdiff_sp_st",
    "setdiff_sp_sa",
];

/// The 13 features of one triplet. Count-valued features are stored as reals
/// so that models and synthetic fixtures can treat rows uniformly; vectors
/// produced by [`featurize`] always carry nonnegative integral counts and an
/// `overlap_sets_differ` of exactly 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub len_qp: f64,
    pub len_qt: f64,
    pub stops_qp: f64,
    pub stops_qt: f64,
    pub vs_qp_qt: f64,
    pub vs_diff: f64,
    pub dtw_qp_qt: f64,
    pub dtw_diff: f64,
    pub overlap_sp_st: f64,
    pub overlap_sp_sa: f64,
    pub overlap_sets_differ: f64,
    pub setdiff_sp_st: f64,
    pub setdiff_sp_sa: f64,
}

impl FeatureVector {
    pub fn as_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.len_qp,
            self.len_qt,
            self.stops_qp,
            self.stops_qt,
            self.vs_qp_qt,
            self.vs_diff,
            self.dtw_qp_qt,
            self.dtw_diff,
            self.overlap_sp_st,
            self.overlap_sp_sa,
            self.overlap_sets_differ,
            self.setdiff_sp_st,
            self.setdiff_sp_sa,
        ]
    }

    pub fn from_array(values: [f64; FEATURE_COUNT]) -> Self {
        FeatureVector {
            len_qp: values[0],
            len_qt: values[1],
            stops_qp: values[2],
            stops_qt: values[3],
            vs_qp_qt: values[4],
            vs_diff: values[5],
            dtw_qp_qt: values[6],
            dtw_diff: values[7],
            overlap_sp_st: values[8],
            overlap_sp_sa: values[9],
            overlap_sets_differ: values[10],
            setdiff_sp_st: values[11],
            setdiff_sp_sa: values[12],
        }
    }

    /// Copy with the concept-based columns (features 9-13) zeroed; used by the
    /// feature-ablation comparison.
    pub fn without_concept_features(&self) -> Self {
        let mut out = *self;
        out.overlap_sp_st = 0.0;
        out.overlap_sp_sa = 0.0;
        out.overlap_sets_differ = 0.0;
        out.setdiff_sp_st = 0.0;
        out.setdiff_sp_sa = 0.0;
        out
    }
}

/// DTW distance extended to degenerate inputs: an empty side contributes 0
/// so that feature extraction stays total on punctuation-only answer texts.
fn dtw_or_zero(a: &TokenSeq, b: &TokenSeq) -> f64 {
    if a.is_empty() || b.is_empty() {
        0.0
    } else {
        dtw_distance(a, b).unwrap_or(0.0)
    }
}

/// Computes all 13 features for a triplet. Distances use the vector-space
/// model of the archive question's class bucket; concept sets are recognized
/// with the index lexicon.
pub fn featurize(t: &Triplet, index: &CandidateIndex, stops: &StopList) -> FeatureVector {
    let lexicon = index.lexicon();
    let empty_vsm = VectorSpaceModel::default();
    let vsm = index
        .bucket(t.qt.class)
        .map(|b| &b.vsm)
        .unwrap_or(&empty_vsm);

    let at_tokens = tokenize(&t.answer_text);
    let sp = recognize(&t.qp.tokens, lexicon);
    let st = recognize(&t.qt.tokens, lexicon);
    let sa = recognize(&at_tokens, lexicon);

    let vs_qp_at = vs_distance(vsm, &t.qp.tokens, &at_tokens);
    let vs_qt_at = vs_distance(vsm, &t.qt.tokens, &at_tokens);
    let dtw_qp_at = dtw_or_zero(&t.qp.tokens, &at_tokens);
    let dtw_qt_at = dtw_or_zero(&t.qt.tokens, &at_tokens);

    let overlap_pt = sp.overlap(&st);
    let overlap_pa = sp.overlap(&sa);

    FeatureVector {
        len_qp: t.qp.tokens.len() as f64,
        len_qt: t.qt.tokens.len() as f64,
        stops_qp: count_stopwords(&t.qp.tokens, stops) as f64,
        stops_qt: count_stopwords(&t.qt.tokens, stops) as f64,
        vs_qp_qt: vs_distance(vsm, &t.qp.tokens, &t.qt.tokens),
        vs_diff: (vs_qp_at - vs_qt_at).abs(),
        dtw_qp_qt: dtw_or_zero(&t.qp.tokens, &t.qt.tokens),
        dtw_diff: (dtw_qp_at - dtw_qt_at).abs(),
        overlap_sp_st: overlap_pt.len() as f64,
        overlap_sp_sa: overlap_pa.len() as f64,
        overlap_sets_differ: if overlap_pt == overlap_pa { 0.0 } else { 1.0 },
        setdiff_sp_st: sp.symmetric_difference_count(&st) as f64,
        setdiff_sp_sa: sp.symmetric_difference_count(&sa) as f64,
    }
}

/// Equal-frequency bin assignment. Edges sit at sorted quantile positions, so
/// identical values always land in the same bin and at most `bins` bins exist.
fn bin_assignments(values: &[f64], bins: usize) -> Vec<usize> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut edges: Vec<f64> = Vec::new();
    for b in 1..bins {
        let idx = (b * n) / bins;
        if idx < n {
            edges.push(sorted[idx]);
        }
    }
    edges.dedup_by(|a, b| a == b);
    values
        .iter()
        .map(|v| edges.iter().filter(|e| **e <= *v).count())
        .collect()
}

fn entropy_bits(valid: usize, invalid: usize) -> f64 {
    let n = (valid + invalid) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for count in [valid, invalid] {
        if count > 0 {
            let p = count as f64 / n;
            h -= p * p.log2();
        }
    }
    h
}

/// Information gain of a feature column for binary labels, in bits:
/// `H(labels) - Σ_b (n_b/n) · H(labels | bin b)` with the feature discretized
/// into `bins` equal-frequency bins. Constant columns score 0.
pub fn information_gain(values: &[f64], labels: &[Label], bins: usize) -> Result<f64> {
    if values.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: labels.len(),
        });
    }
    if values.is_empty() {
        return Err(Error::EmptyInput("information gain column"));
    }
    let assignments = bin_assignments(values, bins.max(1));
    let mut per_bin: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut total = (0usize, 0usize);
    for (bin, label) in assignments.iter().zip(labels) {
        let slot = per_bin.entry(*bin).or_insert((0, 0));
        match label {
            Label::Valid => {
                slot.0 += 1;
                total.0 += 1;
            }
            Label::Invalid => {
                slot.1 += 1;
                total.1 += 1;
            }
        }
    }
    let n = values.len() as f64;
    let conditional: f64 = per_bin
        .values()
        .map(|&(v, i)| ((v + i) as f64 / n) * entropy_bits(v, i))
        .sum();
    Ok((entropy_bits(total.0, total.1) - conditional).max(0.0))
}

/// Information gain of every feature column over a labeled set, sorted from
/// most to least informative.
pub fn feature_information_gains(
    rows: &[(FeatureVector, Label)],
    bins: usize,
) -> Result<Vec<(&'static str, f64)>> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("labeled feature rows"));
    }
    let labels: Vec<Label> = rows.iter().map(|(_, l)| *l).collect();
    let mut gains = Vec::with_capacity(FEATURE_COUNT);
    for (i, name) in FEATURE_NAMES.iter().enumerate() {
        let column: Vec<f64> = rows.iter().map(|(f, _)| f.as_array()[i]).collect();
        gains.push((*name, information_gain(&column, &labels, bins)?));
    }
    gains.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(gains)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Answer, QAThread};
    use crate::lexicon::ConceptLexicon;
    use crate::pipeline::{build_index, extract_candidates};
    use crate::question::TriggerTable;
    use crate::textproc::StopList;

    fn stops() -> StopList {
        StopList::new(["is", "a", "for", "and", "the", "of", "in", "to"]).unwrap()
    }

    fn thread(id: &str, title: &str, answers: &[(&str, u64, bool)]) -> QAThread {
        QAThread {
            id: id.into(),
            title: title.into(),
            description: String::new(),
            answers: answers
                .iter()
                .map(|(text, likes, best)| Answer {
                    text: (*text).into(),
                    likes: *likes,
                    is_best: *best,
                })
                .collect(),
        }
    }

    #[test]
    fn worked_example_general_features() {
        let corpus = vec![
            thread(
                "p",
                "anxiety medication for drug/alcohol addiction?",
                &[("placeholder", 0, true)],
            ),
            thread(
                "t",
                "Is chlordiazepoxide/librium a good medication for alcohol withdrawal and the associated anxiety?",
                &[("chlordiazepoxide has been the standard drug", 0, true)],
            ),
        ];
        let index = build_index(&corpus, ConceptLexicon::default(), TriggerTable::builtin()).unwrap();
        // both titles classify as yes-no? the first has no trigger/auxiliary -> others;
        // build the triplet by hand from the extracted sub-questions instead.
        let qp = index.threads()[0].subquestions[0].clone();
        let qt = index.threads()[1].subquestions[0].clone();
        let t = crate::pipeline::Triplet {
            qp,
            qt,
            answer_text: "chlordiazepoxide has been the standard drug".into(),
            answer_rank: crate::pipeline::AnswerRank::Best,
            distance: crate::similarity::Distance {
                value: 0.0,
                measure: crate::similarity::Measure::Dtw,
            },
            label: None,
            score: None,
        };
        let f = featurize(&t, &index, &stops());
        assert_eq!(f.len_qp, 5.0);
        assert_eq!(f.len_qt, 12.0);
        assert_eq!(f.stops_qp, 1.0);
        assert_eq!(f.stops_qt, 5.0);
    }

    #[test]
    fn identical_texts_zero_distances() {
        let corpus = vec![
            thread("a", "why does my head hurt after drinking?", &[("drink water", 2, true)]),
            thread("b", "why do hangovers happen at all?", &[("dehydration mostly", 1, true)]),
        ];
        let index = build_index(&corpus, ConceptLexicon::default(), TriggerTable::builtin()).unwrap();
        let qp = index.threads()[0].subquestions[0].clone();
        let mut t = extract_candidates(&qp, &index, 0.5, 2).unwrap().remove(0);
        // force Q_p = Q_t and A_t = the archive answer of Q_t's own thread
        t.qp = t.qt.clone();
        t.answer_text = "dehydration mostly".into();
        let f = featurize(&t, &index, &stops());
        assert_eq!(f.vs_qp_qt, 0.0);
        assert_eq!(f.dtw_qp_qt, 0.0);
        assert_eq!(f.vs_diff, 0.0);
        assert_eq!(f.dtw_diff, 0.0);
    }

    #[test]
    fn concept_features_from_hand_computed_sets() {
        // S_P = {pa, pb, pc}, S_T = {pa, pb, pd}, S_A = {pa, pc, pe, pf}:
        // f9 = 2, f10 = 2, overlap sets {pa,pb} vs {pa,pc} differ -> f11 = 1,
        // f12 = |{pc} u {pd}| = 2, f13 = |{pb} u {pe,pf}| = 3
        let lexicon = ConceptLexicon::new(
            ["pa", "pb", "pc", "pd", "pe", "pf"]
                .into_iter()
                .map(|t| (t, ["pharmacologic substance"])),
        )
        .unwrap();
        let corpus = vec![
            thread("p", "what about pa pb pc?", &[("placeholder", 0, true)]),
            thread("t", "what about pa pb pd?", &[("pa pc pe pf", 0, true)]),
        ];
        let index = build_index(&corpus, lexicon, TriggerTable::builtin()).unwrap();
        let qp = index.threads()[0].subquestions[0].clone();
        let qt = index.threads()[1].subquestions[0].clone();
        let t = crate::pipeline::Triplet {
            qp,
            qt,
            answer_text: "pa pc pe pf".into(),
            answer_rank: crate::pipeline::AnswerRank::Best,
            distance: crate::similarity::Distance {
                value: 0.0,
                measure: crate::similarity::Measure::Dtw,
            },
            label: None,
            score: None,
        };
        let f = featurize(&t, &index, &stops());
        assert_eq!(f.overlap_sp_st, 2.0);
        assert_eq!(f.overlap_sp_sa, 2.0);
        assert_eq!(f.overlap_sets_differ, 1.0);
        assert_eq!(f.setdiff_sp_st, 2.0);
        assert_eq!(f.setdiff_sp_sa, 3.0);
    }

    #[test]
    fn information_gain_perfect_binary_predictor() {
        let values = [0.0, 1.0, 0.0, 1.0];
        let labels = [Label::Invalid, Label::Valid, Label::Invalid, Label::Valid];
        let gain = information_gain(&values, &labels, 10).unwrap();
        assert!((gain - 1.0).abs() < 1e-12);
    }

    #[test]
    fn information_gain_constant_feature_is_zero() {
        let values = [3.5; 6];
        let labels = [
            Label::Valid,
            Label::Invalid,
            Label::Valid,
            Label::Invalid,
            Label::Valid,
            Label::Invalid,
        ];
        assert_eq!(information_gain(&values, &labels, 10).unwrap(), 0.0);
    }

    #[test]
    fn information_gain_hand_example() {
        // H(2 valid, 2 invalid) = 1 bit; the indicator splits off one invalid:
        // 1 - 0.75 * H(2/3, 1/3) = 1 - 0.6887 = 0.3113 bits
        let values = [1.0, 1.0, 1.0, 0.0];
        let labels = [Label::Valid, Label::Valid, Label::Invalid, Label::Invalid];
        let gain = information_gain(&values, &labels, 10).unwrap();
        assert!((gain - 0.311_278_124_459_132_84).abs() < 1e-12);
        assert!((gain - 0.3113).abs() < 1e-4);
    }

    #[test]
    fn information_gain_length_mismatch_errors() {
        assert!(matches!(
            information_gain(&[1.0], &[Label::Valid, Label::Invalid], 10),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn gains_are_ranked_descending() {
        let rows: Vec<(FeatureVector, Label)> = (0..20)
            .map(|i| {
                let mut arr = [0.0; FEATURE_COUNT];
                arr[6] = f64::from(i % 2); // dtw_qp_qt predicts perfectly
                arr[0] = f64::from(i % 3); // weak column
                let label = if i % 2 == 0 { Label::Invalid } else { Label::Valid };
                (FeatureVector::from_array(arr), label)
            })
            .collect();
        let gains = feature_information_gains(&rows, 10).unwrap();
        assert_eq!(gains[0].0, "dtw_qp_qt");
        assert!(gains[0].1 >= gains.last().unwrap().1);
    }
}
