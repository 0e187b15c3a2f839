//! Acceptance suite: one test per criterion, each printing a PASS line.
//! Run with `cargo test -p cqa-cli --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use cqa_core::corpus::{Answer, Label, QAThread};
use cqa_core::eval::{
    mrr, overall_accuracy, paired_ttest, prf, select_threshold, LabeledGroup, QuestionGroup,
};
use cqa_core::features::{featurize, information_gain, FeatureVector, FEATURE_COUNT};
use cqa_core::learn::objective::{
    CalibrationObjective, Dataset, HingeObjective, LogisticObjective, MlpObjective, Objective,
};
use cqa_core::learn::{
    predict_proba, train_em, train_supervised, ClassifierKind, Hyperparams, LabeledSet,
};
use cqa_core::lexicon::ConceptLexicon;
use cqa_core::pipeline::{build_index, extract_candidates, generate_training_triplets};
use cqa_core::question::TriggerTable;
use cqa_core::textproc::{count_stopwords, levenshtein, tokenize, StopList, TokenSeq};

fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn shipped_stoplist() -> StopList {
    let contents = std::fs::read_to_string(data_file("stopwords.txt")).unwrap();
    StopList::parse(&contents).unwrap()
}

// ------------------------------------------------------------ criterion 1 --

#[test]
fn criterion_01_worked_example_general_features() {
    let start = Instant::now();
    let stops = shipped_stoplist();
    let qp = tokenize("anxiety medication for drug/alcohol addiction?");
    let qt = tokenize(
        "Is chlordiazepoxide/librium a good medication for alcohol withdrawal and the associated anxiety?",
    );
    assert_eq!(qp.len(), 5);
    assert_eq!(qt.len(), 12);
    assert_eq!(count_stopwords(&qp, &stops), 1);
    assert_eq!(count_stopwords(&qt, &stops), 5);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("criterion 1 (worked-example features f1-f4 = 5/12/1/5): PASS ({elapsed:?})");
}

// ------------------------------------------------------------ criterion 2 --

fn dtw_path_oracle(a: &[String], b: &[String]) -> f64 {
    fn walk(a: &[String], b: &[String], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + levenshtein(&a[i], &b[j]) as f64;
        if i == a.len() - 1 && j == b.len() - 1 {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

fn random_token(rng: &mut ChaCha12Rng) -> String {
    let len = rng.random_range(1..=4);
    (0..len)
        .map(|_| char::from(b'a' + rng.random_range(0..4u8)))
        .collect()
}

#[test]
fn criterion_02_dtw_matches_exhaustive_path_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xD7);
    for _ in 0..1000 {
        let la = rng.random_range(1..=5);
        let lb = rng.random_range(1..=5);
        let a: Vec<String> = (0..la).map(|_| random_token(&mut rng)).collect();
        let b: Vec<String> = (0..lb).map(|_| random_token(&mut rng)).collect();
        let fast = cqa_core::similarity::dtw_distance(
            &TokenSeq::from_tokens(a.clone()),
            &TokenSeq::from_tokens(b.clone()),
        )
        .unwrap();
        let oracle = dtw_path_oracle(&a, &b);
        assert_eq!(fast, oracle, "mismatch on {a:?} vs {b:?}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("criterion 2 (DTW = exhaustive path oracle, 1000 pairs): PASS ({elapsed:?})");
}

// ------------------------------------------------------------ criterion 3 --

fn naive_levenshtein(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let substitution = naive_levenshtein(&a[1..], &b[1..]) + usize::from(a[0] != b[0]);
    let deletion = naive_levenshtein(&a[1..], b) + 1;
    let insertion = naive_levenshtein(a, &b[1..]) + 1;
    substitution.min(deletion).min(insertion)
}

#[test]
fn criterion_03_levenshtein_matches_naive_recursion() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x1e);
    let random_string = |rng: &mut ChaCha12Rng| -> String {
        let len = rng.random_range(0..=8);
        (0..len)
            .map(|_| char::from(b'a' + rng.random_range(0..4u8)))
            .collect()
    };
    let mut sample = Vec::new();
    for _ in 0..1000 {
        let a = random_string(&mut rng);
        let b = random_string(&mut rng);
        let fast = levenshtein(&a, &b);
        let chars_a: Vec<char> = a.chars().collect();
        let chars_b: Vec<char> = b.chars().collect();
        assert_eq!(fast, naive_levenshtein(&chars_a, &chars_b), "{a} vs {b}");
        sample.push((a, b));
    }
    // metric axioms on the same sample
    for window in sample.windows(2) {
        let (a, b) = (&window[0].0, &window[0].1);
        let c = &window[1].0;
        assert_eq!(levenshtein(a, b), levenshtein(b, a));
        assert_eq!(levenshtein(a, a), 0);
        assert_eq!(levenshtein(a, b) == 0, a == b);
        assert!(levenshtein(a, b) <= levenshtein(a, c) + levenshtein(c, b));
    }
    println!("criterion 3 (Levenshtein = naive recursion + metric axioms, 1000 pairs): PASS");
}

// ------------------------------------------------------------ criterion 4 --

fn finite_difference<O: Objective>(obj: &O, params: &[f64], rows: &[usize]) -> Vec<f64> {
    let h = 1e-6;
    (0..params.len())
        .map(|k| {
            let mut plus = params.to_vec();
            let mut minus = params.to_vec();
            plus[k] += h;
            minus[k] -= h;
            (obj.value(&plus, rows) - obj.value(&minus, rows)) / (2.0 * h)
        })
        .collect()
}

fn check_gradients<O: Objective>(obj: &O, rng: &mut ChaCha12Rng, what: &str, avoid_kink: bool) {
    let rows: Vec<usize> = (0..obj.rows()).collect();
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 20 {
        attempts += 1;
        assert!(attempts < 500, "{what}: could not sample 20 clean points");
        let params: Vec<f64> = (0..obj.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        if avoid_kink {
            // hinge subgradient: skip parameter points with a margin at the kink
            let g1 = obj.gradient(&params, &rows);
            let mut nudged = params.clone();
            nudged[0] += 1e-5;
            let g2 = obj.gradient(&nudged, &rows);
            if g1.iter().zip(&g2).any(|(a, b)| (a - b).abs() > 1e-3) {
                continue;
            }
        }
        let analytic = obj.gradient(&params, &rows);
        let numeric = finite_difference(obj, &params, &rows);
        for (a, n) in analytic.iter().zip(&numeric) {
            let scale = a.abs().max(n.abs()).max(1.0);
            assert!(
                (a - n).abs() <= 1e-5 * scale,
                "{what}: analytic {a} vs numeric {n}"
            );
        }
        checked += 1;
    }
}

#[test]
fn criterion_04_gradients_match_finite_differences() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x9d);
    let n = 24;
    let data = Dataset {
        x: (0..n)
            .map(|_| (0..FEATURE_COUNT).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect(),
        y: (0..n).map(|i| f64::from(i % 2 == 0)).collect(),
    };
    check_gradients(&LogisticObjective { data: &data, l2: 0.01 }, &mut rng, "logistic", false);
    check_gradients(
        &MlpObjective { data: &data, hidden: 5, l2: 0.01, squared_loss: false },
        &mut rng,
        "nnet cross-entropy",
        false,
    );
    check_gradients(
        &MlpObjective { data: &data, hidden: 5, l2: 0.01, squared_loss: true },
        &mut rng,
        "nnet least-squares",
        false,
    );
    check_gradients(&HingeObjective { data: &data, l2: 0.01 }, &mut rng, "hinge", true);
    let calibration = CalibrationObjective {
        decisions: (0..n).map(|_| rng.random_range(-3.0..3.0)).collect(),
        y: (0..n).map(|i| f64::from(i % 3 == 0)).collect(),
    };
    check_gradients(&calibration, &mut rng, "calibration", false);
    println!("criterion 4 (all objective gradients match central differences at 20 points): PASS");
}

// ------------------------------------------------------------ criterion 5 --

#[test]
fn criterion_05_metric_hand_checks() {
    // mrr over best-valid ranks 1, 2, 4
    let groups = vec![
        QuestionGroup {
            id: "r1".into(),
            items: vec![(Label::Valid, 0.9), (Label::Invalid, 0.5)],
        },
        QuestionGroup {
            id: "r2".into(),
            items: vec![(Label::Invalid, 0.8), (Label::Valid, 0.6)],
        },
        QuestionGroup {
            id: "r4".into(),
            items: vec![
                (Label::Invalid, 0.9),
                (Label::Invalid, 0.8),
                (Label::Invalid, 0.7),
                (Label::Valid, 0.1),
            ],
        },
    ];
    assert!((mrr(&groups).unwrap() - 0.583_333_333_333_333_3).abs() < 1e-9);

    // prf on TP=2 FP=1 FN=2
    let pred = vec![Label::Valid, Label::Valid, Label::Valid, Label::Invalid, Label::Invalid];
    let gold = vec![Label::Valid, Label::Valid, Label::Invalid, Label::Valid, Label::Valid];
    let (p, r, f1) = prf(&pred, &gold).unwrap();
    assert!((p - 0.666_666_666_666_666_6).abs() < 1e-9);
    assert!((r - 0.5).abs() < 1e-9);
    assert!((f1 - 0.571_428_571_428_571_4).abs() < 1e-9);

    // overall accuracy rule cases, exact
    let mixed = vec![
        QuestionGroup {
            id: "hit".into(),
            items: vec![(Label::Valid, 0.9), (Label::Invalid, 0.2)],
        },
        QuestionGroup {
            id: "miss".into(),
            items: vec![(Label::Valid, 0.3), (Label::Invalid, 0.1)],
        },
    ];
    assert_eq!(overall_accuracy(&mixed, 0.5).unwrap(), 0.5);
    let none_valid = vec![QuestionGroup {
        id: "clean".into(),
        items: vec![(Label::Invalid, 0.2), (Label::Invalid, 0.4)],
    }];
    assert_eq!(overall_accuracy(&none_valid, 0.5).unwrap(), 1.0);
    let none_valid_hit = vec![QuestionGroup {
        id: "dirty".into(),
        items: vec![(Label::Invalid, 0.9)],
    }];
    assert_eq!(overall_accuracy(&none_valid_hit, 0.5).unwrap(), 0.0);

    // threshold selection vs a 10,001-point grid on 200 random instances
    let mut rng = ChaCha12Rng::seed_from_u64(0x55);
    for _ in 0..200 {
        let n = rng.random_range(2..=30);
        let probs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let gold: Vec<Label> = (0..n)
            .map(|_| if rng.random::<f64>() < 0.4 { Label::Valid } else { Label::Invalid })
            .collect();
        if !gold.iter().any(|l| l.is_valid()) || !gold.iter().any(|l| !l.is_valid()) {
            continue;
        }
        let f1_at = |t: f64| {
            let pred: Vec<Label> = probs
                .iter()
                .map(|p| if *p >= t { Label::Valid } else { Label::Invalid })
                .collect();
            prf(&pred, &gold).unwrap().2
        };
        let chosen = select_threshold(&probs, &gold).unwrap();
        let chosen_f1 = f1_at(chosen);
        let grid_best = (0..=10_000)
            .map(|i| f1_at(i as f64 / 10_000.0))
            .fold(0.0f64, f64::max);
        assert!(chosen_f1 >= grid_best - 1e-12, "{chosen_f1} < {grid_best}");
    }
    println!("criterion 5 (metric hand-checks and threshold sweep oracle): PASS");
}

// ------------------------------------------------- criteria 6 & 7 fixture --

/// Two Gaussian clusters at ±0.45 in all 13 dimensions: 40 labeled triplets
/// across 12 question groups (16 valid, two groups all-invalid) plus 1,000
/// unlabeled rows and a 4,000-row held-out test sample.
struct GaussianFixture {
    groups: Vec<LabeledGroup>,
    unlabeled: Vec<FeatureVector>,
    test: Vec<(FeatureVector, Label)>,
}

const FIXTURE_SHIFT: f64 = 0.45;

fn gaussian_fixture(seed: u64) -> GaussianFixture {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = move |rng: &mut ChaCha12Rng| -> f64 {
        let u1: f64 = rng.random::<f64>().max(1e-12);
        let u2: f64 = rng.random::<f64>();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let sample = |valid: bool, rng: &mut ChaCha12Rng| -> FeatureVector {
        let mu = if valid { FIXTURE_SHIFT } else { -FIXTURE_SHIFT };
        let mut arr = [0.0; FEATURE_COUNT];
        for v in arr.iter_mut() {
            *v = mu + normal(rng);
        }
        FeatureVector::from_array(arr)
    };

    let mut groups = Vec::new();
    for g in 0..12 {
        let rows_in_group = if g < 4 { 4 } else { 3 };
        let rows: Vec<(FeatureVector, Label)> = (0..rows_in_group)
            .map(|r| {
                let valid = g < 10 && (r == 0 || (g < 6 && r == 1));
                let label = if valid { Label::Valid } else { Label::Invalid };
                (sample(valid, &mut rng), label)
            })
            .collect();
        groups.push(LabeledGroup {
            id: format!("g{g}"),
            rows,
        });
    }
    let unlabeled: Vec<FeatureVector> =
        (0..1000).map(|i| sample(i % 2 == 0, &mut rng)).collect();
    let test: Vec<(FeatureVector, Label)> = (0..4000)
        .map(|i| {
            let valid = i % 2 == 0;
            (sample(valid, &mut rng), if valid { Label::Valid } else { Label::Invalid })
        })
        .collect();
    GaussianFixture { groups, unlabeled, test }
}

fn fixture_hyper() -> Hyperparams {
    Hyperparams {
        learning_rate: 0.2,
        epochs: 150,
        l2: 1e-4,
        hidden: 8,
        batch_size: 64,
    }
}

/// Trains one arm on the full labeled set, selects the F1-maximizing cutoff
/// on the training rows, and scores the held-out sample.
fn fixture_f1(fx: &GaussianFixture, em_iterations: Option<usize>, seed: u64) -> f64 {
    let rows: Vec<(FeatureVector, Label)> =
        fx.groups.iter().flat_map(|g| g.rows.iter().copied()).collect();
    let labeled = LabeledSet::new(rows.clone()).unwrap();
    let hyper = fixture_hyper();
    let model = match em_iterations {
        None => train_supervised(&labeled, ClassifierKind::NnetL2, &hyper, seed).unwrap(),
        Some(iterations) => train_em(
            &labeled,
            &fx.unlabeled,
            ClassifierKind::NnetL2,
            &hyper,
            iterations,
            fx.unlabeled.len(),
            seed,
        )
        .unwrap(),
    };
    let train_probs: Vec<f64> = rows.iter().map(|(f, _)| predict_proba(&model, f)).collect();
    let train_gold: Vec<Label> = rows.iter().map(|(_, l)| *l).collect();
    let threshold = select_threshold(&train_probs, &train_gold).unwrap();
    let pred: Vec<Label> = fx
        .test
        .iter()
        .map(|(f, _)| {
            if predict_proba(&model, f) >= threshold { Label::Valid } else { Label::Invalid }
        })
        .collect();
    let gold: Vec<Label> = fx.test.iter().map(|(_, l)| *l).collect();
    prf(&pred, &gold).unwrap().2
}

#[test]
fn criterion_06_em_beats_supervised_significantly() {
    let start = Instant::now();
    let mut em_scores = Vec::new();
    let mut supervised_scores = Vec::new();
    for run in 0..20u64 {
        let seed = 42 + run;
        let fx = gaussian_fixture(seed);
        supervised_scores.push(fixture_f1(&fx, None, seed));
        em_scores.push(fixture_f1(&fx, Some(1), seed));
    }
    let (t, significant) = paired_ttest(&em_scores, &supervised_scores, 0.05).unwrap();
    let em_mean = em_scores.iter().sum::<f64>() / 20.0;
    let sup_mean = supervised_scores.iter().sum::<f64>() / 20.0;
    assert!(
        em_scores[0] > supervised_scores[0],
        "seed 42: em {} vs supervised {}",
        em_scores[0],
        supervised_scores[0]
    );
    assert!(
        t > 0.0 && significant,
        "t = {t}, em mean {em_mean}, supervised mean {sup_mean}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "criterion 6 (EM F1 {em_mean:.4} > supervised F1 {sup_mean:.4}, t = {t:.2}, significant): PASS ({elapsed:?})"
    );
}

#[test]
fn criterion_07_extra_em_iterations_change_little() {
    let mut total = 0.0;
    for run in 0..20u64 {
        let seed = 42 + run;
        let fx = gaussian_fixture(seed);
        let one = fixture_f1(&fx, Some(1), seed);
        let ten = fixture_f1(&fx, Some(10), seed);
        total += (one - ten).abs();
    }
    let mean_gap = total / 20.0;
    assert!(mean_gap < 0.02, "mean |F1(10) - F1(1)| = {mean_gap}");
    println!("criterion 7 (mean |F1(10 iter) - F1(1 iter)| = {mean_gap:.4} < 0.02): PASS");
}

// ------------------------------------------------------------ criterion 8 --

#[test]
fn criterion_08_candidate_count_contract() {
    fn two_answer_thread(id: &str, title: &str) -> QAThread {
        QAThread {
            id: id.into(),
            title: title.into(),
            description: String::new(),
            answers: vec![
                Answer { text: format!("best answer of {id}"), likes: 1, is_best: true },
                Answer { text: format!("second answer of {id}"), likes: 3, is_best: false },
            ],
        }
    }
    let corpus = vec![
        two_answer_thread("q", "why do i shake after drinking?"),
        two_answer_thread("a", "why do hands tremble in withdrawal?"),
        two_answer_thread("b", "why does my head hurt the morning after?"),
    ];
    let index = build_index(&corpus, ConceptLexicon::default(), TriggerTable::builtin()).unwrap();
    let qp = index.threads()[0].subquestions[0].clone();
    let triplets = extract_candidates(&qp, &index, 0.5, 2).unwrap();
    assert_eq!(triplets.len(), 8);
    println!("criterion 8 (2 archive questions x 2 answers -> exactly 8 triplets): PASS");
}

// ------------------------------------------------------------ criterion 9 --

const ABLATION_DRUGS: [&str; 8] = [
    "naltrexone",
    "acamprosate",
    "disulfiram",
    "gabapentin",
    "baclofen",
    "topiramate",
    "diazepam",
    "lorazepam",
];

const ABLATION_TEMPLATES: [(&str, &str); 4] = [
    ("what should i know about", "before starting it?"),
    ("what must i learn about", "before taking it?"),
    ("what could i ask about", "before trying it?"),
    ("what would i check about", "before using it?"),
];

/// Synthetic corpus where an answer is valid exactly when it names the same
/// drug as the prospective question. Question lengths are constant so the
/// general features carry little signal.
fn ablation_corpus(seed: u64) -> Vec<QAThread> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut corpus = Vec::new();
    for drug in ABLATION_DRUGS {
        for k in 0..5 {
            let (head, tail) = ABLATION_TEMPLATES[rng.random_range(0..ABLATION_TEMPLATES.len())];
            let other = ABLATION_DRUGS[rng.random_range(0..ABLATION_DRUGS.len())];
            corpus.push(QAThread {
                id: format!("{drug}-{k}"),
                title: format!("{head} {drug} {tail}"),
                description: String::new(),
                answers: vec![
                    Answer {
                        text: format!("my doctor started me on {drug} and it helped"),
                        likes: 1,
                        is_best: true,
                    },
                    Answer {
                        text: format!("{other} suited me better than anything else"),
                        likes: 2,
                        is_best: false,
                    },
                ],
            });
        }
    }
    corpus
}

fn drug_of(thread_id: &str) -> &str {
    thread_id.rsplit_once('-').map(|(d, _)| d).unwrap_or(thread_id)
}

#[test]
fn criterion_09_concept_features_lift_f1() {
    let seed = 42;
    let corpus = ablation_corpus(seed);
    let lexicon = ConceptLexicon::parse(cqa_cli::formats::DEFAULT_LEXICON).unwrap();
    let index = build_index(&corpus, lexicon, TriggerTable::builtin()).unwrap();
    let stops = shipped_stoplist();

    // gold rule: valid iff the candidate answer names the prospective drug
    let triplets = generate_training_triplets(&index, 0.5, 2).unwrap();
    let mut rows: Vec<(String, FeatureVector, Label)> = Vec::new();
    for t in &triplets {
        let drug = drug_of(&t.qp.source_thread);
        let label = if t.answer_text.contains(drug) { Label::Valid } else { Label::Invalid };
        rows.push((t.qp.source_thread.clone(), featurize(t, &index, &stops), label));
    }

    // split threads: 24 train / 16 test, interleaved for drug balance
    let thread_ids: Vec<String> = index.threads().iter().map(|t| t.id.clone()).collect();
    let is_test = |id: &str| {
        thread_ids.iter().position(|t| t == id).unwrap() % 5 >= 3
    };
    let evaluate = |strip_concepts: bool| -> f64 {
        let transform = |f: &FeatureVector| {
            if strip_concepts { f.without_concept_features() } else { *f }
        };
        let train_rows: Vec<(FeatureVector, Label)> = rows
            .iter()
            .filter(|(id, _, _)| !is_test(id))
            .map(|(_, f, l)| (transform(f), *l))
            .collect();
        let test_rows: Vec<(FeatureVector, Label)> = rows
            .iter()
            .filter(|(id, _, _)| is_test(id))
            .map(|(_, f, l)| (transform(f), *l))
            .collect();
        let unlabeled: Vec<FeatureVector> = test_rows.iter().map(|(f, _)| *f).collect();
        let labeled = LabeledSet::new(train_rows.clone()).unwrap();
        let model = train_em(
            &labeled,
            &unlabeled,
            ClassifierKind::NnetL2,
            &fixture_hyper(),
            1,
            unlabeled.len(),
            seed,
        )
        .unwrap();
        let train_probs: Vec<f64> =
            train_rows.iter().map(|(f, _)| predict_proba(&model, f)).collect();
        let train_gold: Vec<Label> = train_rows.iter().map(|(_, l)| *l).collect();
        let threshold = select_threshold(&train_probs, &train_gold).unwrap();
        let pred: Vec<Label> = test_rows
            .iter()
            .map(|(f, _)| {
                if predict_proba(&model, f) >= threshold { Label::Valid } else { Label::Invalid }
            })
            .collect();
        let gold: Vec<Label> = test_rows.iter().map(|(_, l)| *l).collect();
        prf(&pred, &gold).unwrap().2
    };

    let with_concepts = evaluate(false);
    let without_concepts = evaluate(true);
    assert!(
        with_concepts > without_concepts,
        "with {with_concepts} vs without {without_concepts}"
    );
    println!(
        "criterion 9 (concept features: F1 {with_concepts:.4} > {without_concepts:.4} without): PASS"
    );
}

// ----------------------------------------------------------- criterion 10 --

fn run_cqa(args: &[&str]) -> (String, String, i32) {
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_cqa"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
        output.status.code().unwrap_or(-1),
    )
}

#[test]
fn criterion_10_train_and_evaluate_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = data_file("fixtures/corpus.jsonl");
    let labels = data_file("fixtures/labels.jsonl");
    let index = dir.path().join("index.json");

    let (_, err, code) = run_cqa(&[
        "ingest",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        index.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");

    let mut train_outputs = Vec::new();
    for run in 0..2 {
        let model = dir.path().join(format!("model-{run}.json"));
        let (stdout_raw, err, code) = run_cqa(&[
            "train",
            "--index",
            index.to_str().unwrap(),
            "--labels",
            labels.to_str().unwrap(),
            "--classifier",
            "nnet_l2",
            "--mode",
            "em",
            "--iterations",
            "1",
            "--seed",
            "42",
            "--out",
            model.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        // normalize the output path the summary echoes
        let stdout = stdout_raw.replace(&format!("model-{run}.json"), "model.json");
        train_outputs.push((stdout, std::fs::read(&model).unwrap()));
    }
    assert_eq!(train_outputs[0].0, train_outputs[1].0, "train stdout differs");
    assert_eq!(train_outputs[0].1, train_outputs[1].1, "model bytes differ");

    let mut eval_outputs = Vec::new();
    for run in 0..2 {
        let report = dir.path().join(format!("report-{run}"));
        let (_, err, code) = run_cqa(&[
            "evaluate",
            "--index",
            index.to_str().unwrap(),
            "--labels",
            labels.to_str().unwrap(),
            "--classifier",
            "log",
            "--mode",
            "supervised",
            "--folds",
            "7",
            "--runs",
            "2",
            "--seed",
            "42",
            "--out",
            report.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        eval_outputs.push((
            std::fs::read(report.with_extension("json")).unwrap(),
            std::fs::read(report.with_extension("txt")).unwrap(),
        ));
    }
    assert_eq!(eval_outputs[0].0, eval_outputs[1].0, "report json differs");
    assert_eq!(eval_outputs[0].1, eval_outputs[1].1, "report txt differs");
    println!("criterion 10 (train/evaluate outputs byte-identical across reruns): PASS");
}

// ----------------------------------------------------------- criterion 11 --

/// Brute-force gain: recompute edges, group rows, and count label entropy
/// from scratch.
fn brute_force_gain(values: &[f64], labels: &[Label], bins: usize) -> f64 {
    let entropy = |rows: &[Label]| -> f64 {
        if rows.is_empty() {
            return 0.0;
        }
        let valid = rows.iter().filter(|l| l.is_valid()).count() as f64;
        let n = rows.len() as f64;
        let mut h = 0.0;
        for p in [valid / n, (n - valid) / n] {
            if p > 0.0 {
                h -= p * p.log2();
            }
        }
        h
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut edges = Vec::new();
    for b in 1..bins {
        let idx = (b * sorted.len()) / bins;
        if idx < sorted.len() && !edges.contains(&sorted[idx]) {
            edges.push(sorted[idx]);
        }
    }
    let mut grouped: BTreeMap<usize, Vec<Label>> = BTreeMap::new();
    for (v, l) in values.iter().zip(labels) {
        let bin = edges.iter().filter(|e| **e <= *v).count();
        grouped.entry(bin).or_default().push(*l);
    }
    let n = labels.len() as f64;
    let conditional: f64 = grouped
        .values()
        .map(|rows| (rows.len() as f64 / n) * entropy(rows))
        .sum();
    (entropy(labels) - conditional).max(0.0)
}

#[test]
fn criterion_11_information_gain_matches_brute_force() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x16);
    for _ in 0..500 {
        let n = rng.random_range(2..=50);
        let discrete = rng.random::<bool>();
        let values: Vec<f64> = (0..n)
            .map(|_| {
                if discrete {
                    f64::from(rng.random_range(0..4u8))
                } else {
                    rng.random_range(-3.0..3.0)
                }
            })
            .collect();
        let labels: Vec<Label> = (0..n)
            .map(|_| if rng.random::<f64>() < 0.35 { Label::Valid } else { Label::Invalid })
            .collect();
        let fast = information_gain(&values, &labels, 10).unwrap();
        let brute = brute_force_gain(&values, &labels, 10);
        assert!((fast - brute).abs() < 1e-9, "{fast} vs {brute}");
    }

    // hand example: indicator splitting one invalid row off a balanced set
    let values = [1.0, 1.0, 1.0, 0.0];
    let labels = [Label::Valid, Label::Valid, Label::Invalid, Label::Invalid];
    let gain = information_gain(&values, &labels, 10).unwrap();
    let expected = 1.0 - 0.75 * ((2.0f64 / 3.0) * (3.0f64 / 2.0).log2() + (1.0 / 3.0) * 3.0f64.log2());
    assert!((gain - expected).abs() < 1e-12);
    assert!((gain - 0.3113).abs() < 1e-4);
    println!("criterion 11 (information gain = brute force on 500 columns; 0.3113 exact): PASS");
}
