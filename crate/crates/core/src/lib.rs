//! Answer retrieval and re-ranking for community Q&A archives.
//!
//! Given an archive of resolved question threads, the engine answers a new
//! question in two phases. Phase one extracts short sub-questions, routes
//! them into 13 keyword classes, and searches the matching class bucket with
//! two distance measures (word-sequence DTW over character edit distances,
//! and tf-idf Euclidean distance), extracting the two closest questions'
//! best and second answers as candidate triplets. Phase two re-ranks the
//! candidates with a classifier over 13 features, trained supervised or with
//! an EM-style semi-supervised loop over labeled plus unlabeled triplets.
//!
//! Module map:
//! - [`corpus`]: thread model, answer selection, labels
//! - [`textproc`]: tokenizer, stop words, Levenshtein distance
//! - [`question`]: sub-question extraction and class routing
//! - [`lexicon`]: concept recognition and the treatment-concept test
//! - [`similarity`]: DTW and vector-space distances, concept reweighting
//! - [`pipeline`]: candidate index, extraction, end-to-end answering
//! - [`features`]: the 13-feature vector and information gain
//! - [`learn`]: the four classifiers, calibration, and the EM loop
//! - [`eval`]: metrics, cross-validation, threshold selection, t-tests

pub mod corpus;
mod error;
pub mod eval;
pub mod features;
pub mod learn;
pub mod lexicon;
pub mod pipeline;
pub mod question;
pub mod rng;
pub mod similarity;
pub mod textproc;

pub use error::{Error, Result};
