//! Question- and triplet-level evaluation: overall accuracy, mean reciprocal
//! rank, precision/recall/F1, F1-maximizing threshold selection, grouped
//! 10-fold cross-validation, and paired t-tests.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::learn::{
    predict_proba, train_em, train_supervised, ClassifierKind, Hyperparams, LabeledSet,
};
use crate::rng::derive_seed;

/// One test question's candidate triplets: gold label and predicted
/// probability per triplet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuestionGroup {
    pub id: String,
    pub items: Vec<(Label, f64)>,
}

impl QuestionGroup {
    pub fn has_gold_valid(&self) -> bool {
        self.items.iter().any(|(l, _)| l.is_valid())
    }
}

/// One question's labeled feature rows; the unit that cross-validation folds
/// are built from, so a question's triplets never straddle train and test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledGroup {
    pub id: String,
    pub rows: Vec<(FeatureVector, Label)>,
}

/// Fraction of questions answered correctly. A question with gold-valid
/// triplets is correct when at least one of them scores at or above the
/// threshold; a question without any gold-valid triplet is correct when every
/// triplet scores below it.
pub fn overall_accuracy(groups: &[QuestionGroup], threshold: f64) -> Result<f64> {
    if groups.is_empty() {
        return Err(Error::EmptyInput("question groups"));
    }
    let mut correct = 0usize;
    for group in groups {
        if group.items.is_empty() {
            return Err(Error::EmptyInput("question group items"));
        }
        let ok = if group.has_gold_valid() {
            group
                .items
                .iter()
                .any(|(l, p)| l.is_valid() && *p >= threshold)
        } else {
            group.items.iter().all(|(_, p)| *p < threshold)
        };
        if ok {
            correct += 1;
        }
    }
    Ok(correct as f64 / groups.len() as f64)
}

/// Mean reciprocal rank over groups that contain at least one gold-valid
/// triplet (the caller filters the rest out). Within a group, triplets are
/// ranked by descending probability and the best-ranked gold-valid triplet
/// determines the rank.
pub fn mrr(groups: &[QuestionGroup]) -> Result<f64> {
    if groups.is_empty() {
        return Err(Error::EmptyInput("question groups"));
    }
    let mut sum = 0.0;
    for group in groups {
        if !group.has_gold_valid() {
            return Err(Error::InvalidParameter(format!(
                "group `{}` has no gold-valid triplet; filter before calling mrr",
                group.id
            )));
        }
        let mut order: Vec<usize> = (0..group.items.len()).collect();
        order.sort_by(|&a, &b| group.items[b].1.total_cmp(&group.items[a].1));
        let rank = order
            .iter()
            .position(|&i| group.items[i].0.is_valid())
            .expect("group has a gold-valid triplet")
            + 1;
        sum += 1.0 / rank as f64;
    }
    Ok(sum / groups.len() as f64)
}

/// Precision, recall, and F1 with `valid` as the positive class.
/// Zero-denominator conventions: precision 0 without positive predictions,
/// recall 0 without gold positives, F1 0 when both are 0.
pub fn prf(pred: &[Label], gold: &[Label]) -> Result<(f64, f64, f64)> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: gold.len(),
        });
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (p, g) in pred.iter().zip(gold) {
        match (p.is_valid(), g.is_valid()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok((precision, recall, f1))
}

fn f1_at(probs: &[f64], gold: &[Label], threshold: f64) -> f64 {
    let pred: Vec<Label> = probs
        .iter()
        .map(|p| if *p >= threshold { Label::Valid } else { Label::Invalid })
        .collect();
    prf(&pred, gold).map(|(_, _, f1)| f1).unwrap_or(0.0)
}

/// Sweeps candidate cutoffs (0, 1, and the midpoints between consecutive
/// distinct probabilities) and returns the F1-maximizing threshold; ties go
/// to the smallest threshold.
pub fn select_threshold(probs: &[f64], gold: &[Label]) -> Result<f64> {
    if probs.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: probs.len(),
            right: gold.len(),
        });
    }
    if probs.is_empty() {
        return Err(Error::EmptyInput("probabilities"));
    }
    let has_valid = gold.iter().any(|l| l.is_valid());
    let has_invalid = gold.iter().any(|l| !l.is_valid());
    if !has_valid || !has_invalid {
        return Err(Error::SingleClassGold);
    }

    let mut distinct: Vec<f64> = probs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();

    let mut candidates = vec![0.0];
    for pair in distinct.windows(2) {
        candidates.push((pair[0] + pair[1]) / 2.0);
    }
    candidates.push(1.0);

    let mut best = (f1_at(probs, gold, candidates[0]), candidates[0]);
    for &t in &candidates[1..] {
        let f1 = f1_at(probs, gold, t);
        if f1 > best.0 {
            best = (f1, t);
        }
    }
    Ok(best.1)
}

/// Partitions `groups` question groups into `k` seeded folds whose sizes
/// differ by at most one. Returns group indices per fold.
pub fn kfold(groups: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    if groups < k {
        return Err(Error::NotEnoughGroups { groups, k });
    }
    let mut order: Vec<usize> = (0..groups).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let base = groups / k;
    let extra = groups % k;
    let mut folds = Vec::with_capacity(k);
    let mut cursor = 0usize;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        folds.push(order[cursor..cursor + size].to_vec());
        cursor += size;
    }
    Ok(folds)
}

/// Mean and standard deviation (sample, zero for a single value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return Summary { mean: 0.0, std: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Summary { mean, std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub run: usize,
    pub fold: usize,
    pub threshold: f64,
    pub overall_accuracy: f64,
    pub mrr: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub run: usize,
    pub overall_accuracy: f64,
    pub mrr: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Cross-validation report: per-metric mean/std over runs plus the full
/// per-run and per-fold breakdown.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub overall_accuracy: Summary,
    pub mrr: Summary,
    pub precision: Summary,
    pub recall: Summary,
    pub f1: Summary,
    pub runs: Vec<RunMetrics>,
    pub folds: Vec<FoldMetrics>,
}

/// Supervised training or the EM loop with the given iteration count and
/// unlabeled subset size (`None` samples the whole pool).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TrainMode {
    Supervised,
    Em {
        iterations: usize,
        subset_size: Option<usize>,
    },
}

/// Grouped k-fold cross-validation, repeated `runs` times with derived seeds.
/// Per fold: train on the other folds (plus the unlabeled pool in EM mode),
/// select the F1-maximizing threshold on the training rows, then score the
/// held-out fold. MRR averages only folds that contain gold-valid groups.
#[allow(clippy::too_many_arguments)]
pub fn cross_validate(
    groups: &[LabeledGroup],
    unlabeled: &[FeatureVector],
    kind: ClassifierKind,
    mode: TrainMode,
    hyper: &Hyperparams,
    k: usize,
    seed: u64,
    runs: usize,
) -> Result<MetricReport> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let mut run_metrics = Vec::with_capacity(runs);
    let mut fold_metrics = Vec::new();

    for run in 0..runs {
        let folds = kfold(groups.len(), k, derive_seed(seed, &[1, run as u64]))?;
        let mut fold_values: Vec<FoldMetrics> = Vec::with_capacity(k);

        for (fold_idx, fold) in folds.iter().enumerate() {
            let in_fold = |g: usize| fold.contains(&g);
            let train_rows: Vec<(FeatureVector, Label)> = groups
                .iter()
                .enumerate()
                .filter(|(g, _)| !in_fold(*g))
                .flat_map(|(_, group)| group.rows.iter().copied())
                .collect();
            let train_set = LabeledSet::new(train_rows)?;
            let train_seed = derive_seed(seed, &[2, run as u64, fold_idx as u64]);
            let model = match mode {
                TrainMode::Supervised => train_supervised(&train_set, kind, hyper, train_seed)?,
                TrainMode::Em { iterations, subset_size } => train_em(
                    &train_set,
                    unlabeled,
                    kind,
                    hyper,
                    iterations,
                    subset_size.unwrap_or(unlabeled.len()),
                    train_seed,
                )?,
            };

            let train_probs: Vec<f64> = train_set
                .rows()
                .iter()
                .map(|(f, _)| predict_proba(&model, f))
                .collect();
            let train_gold: Vec<Label> = train_set.rows().iter().map(|(_, l)| *l).collect();
            let threshold = select_threshold(&train_probs, &train_gold)?;

            let held_out: Vec<QuestionGroup> = fold
                .iter()
                .map(|&g| QuestionGroup {
                    id: groups[g].id.clone(),
                    items: groups[g]
                        .rows
                        .iter()
                        .map(|(f, l)| (*l, predict_proba(&model, f)))
                        .collect(),
                })
                .collect();

            let accuracy = overall_accuracy(&held_out, threshold)?;
            let valid_groups: Vec<QuestionGroup> = held_out
                .iter()
                .filter(|g| g.has_gold_valid())
                .cloned()
                .collect();
            let fold_mrr = if valid_groups.is_empty() {
                None
            } else {
                Some(mrr(&valid_groups)?)
            };
            let probs: Vec<f64> = held_out
                .iter()
                .flat_map(|g| g.items.iter().map(|(_, p)| *p))
                .collect();
            let gold: Vec<Label> = held_out
                .iter()
                .flat_map(|g| g.items.iter().map(|(l, _)| *l))
                .collect();
            let pred: Vec<Label> = probs
                .iter()
                .map(|p| if *p >= threshold { Label::Valid } else { Label::Invalid })
                .collect();
            let (precision, recall, f1) = prf(&pred, &gold)?;

            fold_values.push(FoldMetrics {
                run,
                fold: fold_idx,
                threshold,
                overall_accuracy: accuracy,
                mrr: fold_mrr,
                precision,
                recall,
                f1,
            });
        }

        let mean_of = |extract: fn(&FoldMetrics) -> f64| {
            fold_values.iter().map(extract).sum::<f64>() / fold_values.len() as f64
        };
        let mrr_values: Vec<f64> = fold_values.iter().filter_map(|f| f.mrr).collect();
        run_metrics.push(RunMetrics {
            run,
            overall_accuracy: mean_of(|f| f.overall_accuracy),
            mrr: if mrr_values.is_empty() {
                None
            } else {
                Some(mrr_values.iter().sum::<f64>() / mrr_values.len() as f64)
            },
            precision: mean_of(|f| f.precision),
            recall: mean_of(|f| f.recall),
            f1: mean_of(|f| f.f1),
        });
        fold_metrics.extend(fold_values);
    }

    let collect = |extract: fn(&RunMetrics) -> f64| -> Vec<f64> {
        run_metrics.iter().map(extract).collect()
    };
    let mrr_values: Vec<f64> = run_metrics.iter().filter_map(|r| r.mrr).collect();
    Ok(MetricReport {
        overall_accuracy: Summary::from_values(&collect(|r| r.overall_accuracy)),
        mrr: Summary::from_values(&mrr_values),
        precision: Summary::from_values(&collect(|r| r.precision)),
        recall: Summary::from_values(&collect(|r| r.recall)),
        f1: Summary::from_values(&collect(|r| r.f1)),
        runs: run_metrics,
        folds: fold_metrics,
    })
}

/// Two-sided paired t-test on matched samples. Returns the t statistic and
/// whether |t| exceeds the critical value at `alpha` with n-1 degrees of
/// freedom.
pub fn paired_ttest(a: &[f64], b: &[f64], alpha: f64) -> Result<(f64, bool)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter(
            "paired t-test needs at least two pairs".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let n = a.len() as f64;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
    if var <= 0.0 {
        return Err(Error::DegenerateComparison);
    }
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0)
        .map_err(|e| Error::InvalidParameter(format!("t distribution: {e}")))?;
    let critical = dist.inverse_cdf(1.0 - alpha / 2.0);
    Ok((t, t.abs() > critical))
}
