//! The four ranking classifiers (logistic regression, two single-hidden-layer
//! networks, linear SVM with sigmoid calibration) and the semi-supervised EM
//! training loop over labeled plus unlabeled triplets. Training is mini-batch
//! SGD, fully determined by the seed.

pub mod objective;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_COUNT};
use crate::rng::derive_seed;

use objective::{
    sigmoid, CalibrationObjective, Dataset, HingeObjective, LogisticObjective, MlpObjective,
    Objective,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Log,
    Nnet,
    NnetL2,
    Svm,
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::Log => "log",
            ClassifierKind::Nnet => "nnet",
            ClassifierKind::NnetL2 => "nnet_l2",
            ClassifierKind::Svm => "svm",
        })
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(ClassifierKind::Log),
            "nnet" => Ok(ClassifierKind::Nnet),
            "nnet_l2" => Ok(ClassifierKind::NnetL2),
            "svm" => Ok(ClassifierKind::Svm),
            other => Err(Error::InvalidParameter(format!(
                "unknown classifier `{other}` (expected log, nnet, nnet_l2, or svm)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub hidden: usize,
    pub batch_size: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 0.5,
            epochs: 120,
            l2: 1e-4,
            hidden: 8,
            batch_size: 32,
        }
    }
}

/// Per-feature centering and scaling, fitted on labeled training rows only
/// (population standard deviation, so duplicating rows changes nothing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    fn fit(rows: &[(FeatureVector, Label)]) -> Self {
        let n = rows.len() as f64;
        let mut mean = vec![0.0; FEATURE_COUNT];
        for (f, _) in rows {
            for (m, v) in mean.iter_mut().zip(f.as_array()) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = vec![0.0; FEATURE_COUNT];
        for (f, _) in rows {
            for ((s, v), m) in var.iter_mut().zip(f.as_array()).zip(&mean) {
                let d = v - m;
                *s += d * d;
            }
        }
        let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
        Standardization { mean, std }
    }

    /// Constant columns carry no training information and standardize to 0.
    pub fn apply(&self, raw: &[f64; FEATURE_COUNT]) -> Vec<f64> {
        raw.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| if *s < 1e-12 { 0.0 } else { (v - m) / s })
            .collect()
    }
}

/// Labeled feature rows plus the standardization fitted on them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledSet {
    rows: Vec<(FeatureVector, Label)>,
    standardization: Standardization,
}

impl LabeledSet {
    pub fn new(rows: Vec<(FeatureVector, Label)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("labeled training rows"));
        }
        let standardization = Standardization::fit(&rows);
        Ok(LabeledSet {
            rows,
            standardization,
        })
    }

    /// Rows paired with an externally fitted standardization; the EM loop uses
    /// this so pseudo-labeled rows never shift the feature scaling.
    pub fn with_standardization(
        rows: Vec<(FeatureVector, Label)>,
        standardization: Standardization,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("labeled training rows"));
        }
        Ok(LabeledSet {
            rows,
            standardization,
        })
    }

    pub fn rows(&self) -> &[(FeatureVector, Label)] {
        &self.rows
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn dataset(&self) -> Dataset {
        Dataset {
            x: self
                .rows
                .iter()
                .map(|(f, _)| self.standardization.apply(&f.as_array()))
                .collect(),
            y: self
                .rows
                .iter()
                .map(|(_, l)| if l.is_valid() { 1.0 } else { 0.0 })
                .collect(),
        }
    }
}

/// Sigmoid calibration parameters mapping raw decision values to
/// probabilities via `sigmoid(a*d + b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ModelParams {
    Linear {
        weights: Vec<f64>,
        bias: f64,
    },
    Mlp {
        hidden: usize,
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: f64,
    },
}

/// A trained ranking model: classifier parameters, optional calibration,
/// decision threshold, and the training standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankModel {
    pub kind: ClassifierKind,
    pub params: ModelParams,
    pub calibration: Option<Calibration>,
    pub threshold: f64,
    pub seed: u64,
    pub standardization: Standardization,
}

impl RankModel {
    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold must lie in (0, 1), got {threshold}"
            )));
        }
        self.threshold = threshold;
        Ok(self)
    }
}

struct SgdConfig {
    learning_rate: f64,
    epochs: usize,
    batch_size: usize,
}

fn minimize<O: Objective>(
    obj: &O,
    mut params: Vec<f64>,
    cfg: &SgdConfig,
    rng: &mut ChaCha12Rng,
) -> Vec<f64> {
    let mut order: Vec<usize> = (0..obj.rows()).collect();
    let batch = cfg.batch_size.max(1);
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(batch) {
            let grad = obj.gradient(&params, chunk);
            for (p, g) in params.iter_mut().zip(&grad) {
                *p -= cfg.learning_rate * g;
            }
        }
    }
    params
}

fn ensure_both_classes(y: &[f64]) -> Result<()> {
    let valid = y.contains(&1.0);
    let invalid = y.contains(&0.0);
    if valid && invalid {
        Ok(())
    } else {
        Err(Error::DegenerateTrainingSet)
    }
}

/// Trains one supervised classifier. Deterministic given (data, hyper, seed):
/// the seed drives parameter initialization and epoch shuffles.
pub fn train_supervised(
    data: &LabeledSet,
    kind: ClassifierKind,
    hyper: &Hyperparams,
    seed: u64,
) -> Result<RankModel> {
    let dataset = data.dataset();
    ensure_both_classes(&dataset.y)?;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let cfg = SgdConfig {
        learning_rate: hyper.learning_rate,
        epochs: hyper.epochs,
        batch_size: hyper.batch_size,
    };

    let (params, calibration) = match kind {
        ClassifierKind::Log => {
            let obj = LogisticObjective {
                data: &dataset,
                l2: hyper.l2,
            };
            let fitted = minimize(&obj, vec![0.0; obj.dim()], &cfg, &mut rng);
            let (weights, bias) = split_linear(fitted);
            (ModelParams::Linear { weights, bias }, None)
        }
        ClassifierKind::Nnet | ClassifierKind::NnetL2 => {
            let hidden = hyper.hidden.max(1);
            let obj = MlpObjective {
                data: &dataset,
                hidden,
                l2: hyper.l2,
                squared_loss: kind == ClassifierKind::NnetL2,
            };
            let init = mlp_init(hidden, dataset.width(), &mut rng);
            let fitted = minimize(&obj, init, &cfg, &mut rng);
            (split_mlp(fitted, hidden, dataset.width()), None)
        }
        ClassifierKind::Svm => {
            let obj = HingeObjective {
                data: &dataset,
                l2: hyper.l2,
            };
            let fitted = minimize(&obj, vec![0.0; obj.dim()], &cfg, &mut rng);
            let (weights, bias) = split_linear(fitted);
            let decisions: Vec<f64> = dataset
                .x
                .iter()
                .map(|x| weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias)
                .collect();
            let calibration = fit_calibration_targets(&decisions, &dataset.y)?;
            (ModelParams::Linear { weights, bias }, Some(calibration))
        }
    };

    Ok(RankModel {
        kind,
        params,
        calibration,
        threshold: 0.5,
        seed,
        standardization: data.standardization().clone(),
    })
}

fn split_linear(params: Vec<f64>) -> (Vec<f64>, f64) {
    let bias = *params.last().expect("linear params nonempty");
    let mut weights = params;
    weights.pop();
    (weights, bias)
}

fn split_mlp(params: Vec<f64>, hidden: usize, width: usize) -> ModelParams {
    let w1 = params[..hidden * width].to_vec();
    let b1 = params[hidden * width..hidden * width + hidden].to_vec();
    let w2 = params[hidden * width + hidden..hidden * width + 2 * hidden].to_vec();
    let b2 = params[hidden * width + 2 * hidden];
    ModelParams::Mlp { hidden, w1, b1, w2, b2 }
}

fn mlp_init(hidden: usize, width: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
    let mut params = vec![0.0; hidden * width + 2 * hidden + 1];
    let r1 = 1.0 / (width as f64).sqrt();
    for p in params[..hidden * width].iter_mut() {
        *p = rng.random_range(-r1..r1);
    }
    let r2 = 1.0 / (hidden as f64).sqrt();
    let start = hidden * width + hidden;
    for p in params[start..start + hidden].iter_mut() {
        *p = rng.random_range(-r2..r2);
    }
    params
}

/// Raw linear decision value before calibration; probability for the others.
fn forward(model: &RankModel, standardized: &[f64]) -> f64 {
    match &model.params {
        ModelParams::Linear { weights, bias } => {
            weights.iter().zip(standardized).map(|(w, x)| w * x).sum::<f64>() + bias
        }
        ModelParams::Mlp { hidden, w1, b1, w2, b2 } => {
            let width = standardized.len();
            let mut z = *b2;
            for j in 0..*hidden {
                let a: f64 = w1[j * width..(j + 1) * width]
                    .iter()
                    .zip(standardized)
                    .map(|(w, x)| w * x)
                    .sum::<f64>()
                    + b1[j];
                z += w2[j] * sigmoid(a);
            }
            z
        }
    }
}

/// P(valid) for one feature vector, always in [0, 1]. The SVM maps its
/// decision value through the fitted calibration sigmoid; the other kinds
/// emit their sigmoid output directly.
pub fn predict_proba(model: &RankModel, features: &FeatureVector) -> f64 {
    let standardized = model.standardization.apply(&features.as_array());
    let z = forward(model, &standardized);
    match model.kind {
        ClassifierKind::Svm => match model.calibration {
            Some(c) => sigmoid(c.a * z + c.b),
            None => sigmoid(z),
        },
        _ => sigmoid(z),
    }
}

/// Uncalibrated decision value (used when fitting calibration externally).
pub fn decision_value(model: &RankModel, features: &FeatureVector) -> f64 {
    let standardized = model.standardization.apply(&features.as_array());
    forward(model, &standardized)
}

/// Maximum-likelihood sigmoid calibration over decision values: gradient
/// descent with backtracking until the gradient norm drops below 1e-8 or
/// 10^4 steps elapse.
pub fn fit_calibration(decisions: &[f64], labels: &[Label]) -> Result<Calibration> {
    if decisions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: decisions.len(),
            right: labels.len(),
        });
    }
    let y: Vec<f64> = labels
        .iter()
        .map(|l| if l.is_valid() { 1.0 } else { 0.0 })
        .collect();
    fit_calibration_targets(decisions, &y)
}

fn fit_calibration_targets(decisions: &[f64], y: &[f64]) -> Result<Calibration> {
    if decisions.is_empty() {
        return Err(Error::EmptyInput("calibration decisions"));
    }
    ensure_both_classes(y)?;

    let obj = CalibrationObjective {
        decisions: decisions.to_vec(),
        y: y.to_vec(),
    };
    let rows: Vec<usize> = (0..y.len()).collect();
    let mut params = vec![0.0, 0.0];
    let mut value = obj.value(&params, &rows);

    'steps: for _ in 0..10_000 {
        let grad = obj.gradient(&params, &rows);
        let norm_sq = grad[0] * grad[0] + grad[1] * grad[1];
        if norm_sq.sqrt() < 1e-8 {
            break;
        }
        let mut step = 1.0;
        loop {
            let trial = vec![params[0] - step * grad[0], params[1] - step * grad[1]];
            let trial_value = obj.value(&trial, &rows);
            if trial_value <= value - 1e-4 * step * norm_sq {
                params = trial;
                value = trial_value;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                break 'steps;
            }
        }
    }
    Ok(Calibration {
        a: params[0],
        b: params[1],
    })
}

/// The cutoff the current model operates at: the F1-maximizing threshold on
/// the labeled rows. A fixed 0.5 cutoff collapses under class imbalance or a
/// not-yet-converged model, whose outputs sit entirely on one side of 0.5.
fn operational_cutoff(model: &RankModel, labeled: &LabeledSet) -> Result<f64> {
    let probs: Vec<f64> = labeled
        .rows()
        .iter()
        .map(|(f, _)| predict_proba(model, f))
        .collect();
    let gold: Vec<Label> = labeled.rows().iter().map(|(_, l)| *l).collect();
    crate::eval::select_threshold(&probs, &gold)
}

/// EM-style semi-supervised training. Iteration 0 fits on the labeled rows
/// alone; each subsequent iteration hard-labels the unlabeled pool at the
/// current model's operational cutoff, samples `subset_size` rows with the
/// seeded generator (re-sampled every iteration), and retrains from scratch
/// on labeled plus pseudo-labeled rows with the same training seed. With
/// `subset_size = 0` this reduces exactly to supervised training.
pub fn train_em(
    labeled: &LabeledSet,
    unlabeled: &[FeatureVector],
    kind: ClassifierKind,
    hyper: &Hyperparams,
    iterations: usize,
    subset_size: usize,
    seed: u64,
) -> Result<RankModel> {
    if iterations < 1 {
        return Err(Error::InvalidParameter(
            "EM requires at least one iteration".into(),
        ));
    }
    let mut model = train_supervised(labeled, kind, hyper, seed)?;
    if unlabeled.is_empty() {
        log::warn!("EM training requested with an empty unlabeled pool; supervised model returned");
        return Ok(model);
    }
    if subset_size > unlabeled.len() {
        return Err(Error::InvalidParameter(format!(
            "subset size {subset_size} exceeds unlabeled pool of {}",
            unlabeled.len()
        )));
    }

    for iteration in 1..=iterations {
        let cutoff = operational_cutoff(&model, labeled)?;
        let mut sample_rng =
            ChaCha12Rng::seed_from_u64(derive_seed(seed, &[0x5a5a, iteration as u64]));
        let chosen = rand::seq::index::sample(&mut sample_rng, unlabeled.len(), subset_size);
        let mut rows = labeled.rows().to_vec();
        rows.extend(chosen.iter().map(|i| {
            let features = unlabeled[i];
            let label = if predict_proba(&model, &features) >= cutoff {
                Label::Valid
            } else {
                Label::Invalid
            };
            (features, label)
        }));
        let union = LabeledSet::with_standardization(rows, labeled.standardization().clone())?;
        model = train_supervised(&union, kind, hyper, seed)?;
    }
    Ok(model)
}
