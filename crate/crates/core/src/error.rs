use thiserror::Error;

/// Errors surfaced by the engine's core operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unresolved thread `{0}`: no answer is marked best")]
    UnresolvedThread(String),
    #[error("thread `{0}` has more than one answer marked best")]
    MultipleBestAnswers(String),
    #[error("duplicate thread id `{0}`")]
    DuplicateThreadId(String),
    #[error("thread id must be nonempty")]
    EmptyThreadId,
    #[error("invalid stop list: {0}")]
    InvalidStopList(String),
    #[error("invalid trigger table (line {line}): {reason}")]
    InvalidTriggerTable { line: usize, reason: String },
    #[error("invalid lexicon (line {line}): {reason}")]
    InvalidLexicon { line: usize, reason: String },
    #[error("undefined DTW on empty sequence")]
    EmptySequence,
    #[error("concept weight must lie in (0, 1], got {0}")]
    InvalidWeight(f64),
    #[error("no resolvable threads in corpus")]
    NoResolvableThreads,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("degenerate training set: both valid and invalid rows are required")]
    DegenerateTrainingSet,
    #[error("gold labels contain a single class")]
    SingleClassGold,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("need at least {k} question groups for {k}-fold assignment, got {groups}")]
    NotEnoughGroups { groups: usize, k: usize },
    #[error("degenerate comparison: differences have zero variance")]
    DegenerateComparison,
}

pub type Result<T> = core::result::Result<T, Error>;
