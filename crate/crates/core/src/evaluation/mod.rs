//! Classifier training, the multi-run evaluation protocol and significance
//! testing.

mod experiment;
mod report;
mod stats;
mod svm;

use thiserror::Error;

pub use experiment::{
    run_experiment, CorpusFeatures, ExperimentResult, FeatureOptions, RunParams, RunRecord, TargetView,
};
pub use report::{compare, write_results_tsv, write_sweep_tsv, ResultRow, SweepRow};
pub use stats::{mean, sample_std, student_t_p_value, t_test, SignificanceResult, SIGNIFICANCE_LEVEL};
pub use svm::{epoch_orders, evaluate, step_size, train_classifier, LinearModel, SvmConfig};

use crate::autoencoder::AeError;
use crate::corpus::CorpusError;
use crate::representations::RepresentationError;
use crate::selection::{RepresentationKind, SelectionError};
use crate::similarity::{Metric, SimilarityError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("training set is empty")]
    EmptyTraining,
    #[error("evaluation set is empty")]
    EmptyEvaluation,
    #[error("significance needs at least 2 runs per method, got {0}")]
    InsufficientRuns(usize),
    #[error("unknown target domain {0:?}")]
    UnknownTarget(String),
    #[error("target domain {0:?} has no labeled documents")]
    UnlabeledTarget(String),
    #[error("no labeled source documents outside target domain {0:?}")]
    NoSources(String),
    #[error("representation=embedding needs an embeddings file")]
    MissingEmbeddings,
    #[error("representation {0} was not prepared")]
    MissingRepresentation(RepresentationKind),
    #[error("metric {metric} cannot be used with representation {representation}")]
    InvalidCombination { representation: RepresentationKind, metric: Metric },
    #[error("run {run}: {source}")]
    Run { run: usize, source: Box<EvalError> },
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Representation(#[from] RepresentationError),
    #[error(transparent)]
    Autoencoder(#[from] AeError),
}

impl EvalError {
    /// Whether the failure is numerical rather than a data or config problem.
    pub fn is_numeric(&self) -> bool {
        match self {
            EvalError::Autoencoder(AeError::NonFiniteLoss { .. }) => true,
            EvalError::Representation(RepresentationError::Autoencoder(AeError::NonFiniteLoss { .. })) => true,
            EvalError::Run { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
