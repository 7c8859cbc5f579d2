//! Evaluation harness: synthetic warning corpora, Top-K% ranking metrics,
//! stratified cross-validation and experiment runners.

pub mod experiment;
pub mod kfold;
pub mod metrics;
pub mod pipeline;
pub mod synth;

pub use experiment::{
    run_experiment, run_fold, ExperimentConfig, ExperimentPlan, ExperimentResult, ResultRow, Setting,
    WITHIN_PROJECT_FLOOR,
};
pub use kfold::{fold_indices, kfold_split};
pub use metrics::{precision_at_k, prefix_len, rank, recall_at_k, AtK, MetricReport, K_VALUES};
pub use pipeline::Dataset;
pub use synth::{generate_synthetic_corpus, Corpus, CorpusFile, SynthConfig};

use thiserror::Error;
use vulnrank_core::context::ContextError;
use vulnrank_core::textpipe::PipelineError;
use vulnrank_neural::{mix_seed, NeuralError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{scores} scores for {ids} warnings")]
    LengthMismatch { scores: usize, ids: usize },
    #[error("{samples} samples cannot fill {folds} folds")]
    TooFewSamples { samples: usize, folds: usize },
    #[error("project {project} has {warnings} warnings, below the floor of {floor}")]
    ProjectTooSmall { project: String, warnings: usize, floor: usize },
    #[error("warning {0} has no label")]
    Unlabeled(usize),
    #[error("file {0} is not in the corpus")]
    MissingFile(String),
    #[error("{file}: {message}")]
    Frontend { file: String, message: String },
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

/// Named stream derived from a base seed (`"init"`, `"shuffle"`, `"folds"`, ...).
pub fn sub_seed(base: u64, name: &str) -> u64 {
    // FNV-1a of the name, then mixed with the base.
    let h = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    mix_seed(base, h)
}
