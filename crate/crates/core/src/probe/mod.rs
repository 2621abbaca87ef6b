//! Probing harness: synthetic task generators, the labeled-dataset TSV
//! format, a small softmax/MLP classifier and dev-set model selection.

mod classifier;
mod dataset;
mod grid;
pub mod synthetic;
mod tasks;

use thiserror::Error;

pub use classifier::{
    evaluate, train, ClassifierConfig, ClassifierModel, DROPOUTS, HIDDEN_SIZES,
};
pub use dataset::{LabeledSentence, ProbingDataset, Split, Task};
pub use grid::{grid_search, GridOutcome};
pub use tasks::{
    gen_bshift, gen_sentlen, gen_wc, token_name, BShiftParams, SentLenParams, WcParams,
};

use crate::encoder::{EncodeError, Encoder, SentenceMatrix};
use crate::lexicon::{embed_tokens, LexiconError, TokenizedSentence, WordEmbeddingTable};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("invalid classifier config: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("evaluation set is empty")]
    EmptyEvaluationSet,
    #[error("dataset has no examples")]
    EmptyDataset,
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("hyper-parameter grid is empty")]
    EmptyGrid,
    #[error("feature vector has {found} entries, expected {expected}")]
    DimMismatch { expected: usize, found: usize },
    #[error("{features} feature vectors but {labels} labels")]
    LabelCount { features: usize, labels: usize },
    #[error("features contain non-finite values")]
    NonFinite,
    #[error("training diverged (non-finite parameters)")]
    Diverged,
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// Sentence features for every example of `dataset`, in dataset order.
///
/// Sentences that AVG/MAX/DCT* cannot pool (no in-vocabulary words) get a
/// zero vector so that features stay aligned with labels; the number of such
/// sentences is returned alongside.
pub fn dataset_features<T: Scalar>(
    encoder: &Encoder<T>,
    table: &WordEmbeddingTable,
    dataset: &ProbingDataset,
) -> Result<(Vec<Vec<T>>, usize), ProbeError> {
    use rayon::prelude::*;

    let out_len = encoder.method().output_len(table.dim());
    let encoded: Vec<Result<Option<Vec<T>>, ProbeError>> = dataset
        .examples
        .par_iter()
        .map(|e| {
            let sent = TokenizedSentence::from_tokens(&e.tokens);
            let mut mat: SentenceMatrix<T> = embed_tokens(table, &sent)?;
            mat.truncate(encoder.plan().max_len());
            match encoder.encode(&mat) {
                Ok(emb) => Ok(Some(emb.values)),
                Err(EncodeError::EmptySentence { .. }) => Ok(None),
                Err(err) => Err(err.into()),
            }
        })
        .collect();
    let mut features = Vec::with_capacity(encoded.len());
    let mut empty = 0;
    for item in encoded {
        match item? {
            Some(v) => features.push(v),
            None => {
                empty += 1;
                features.push(vec![T::zero(); out_len]);
            }
        }
    }
    Ok((features, empty))
}
