//! Sentence embeddings from word vectors by per-feature DCT-II pooling.
//!
//! A sentence of `N` words is stacked into an `N × d` matrix; every feature
//! column is transformed independently with the orthogonal DCT-II and the
//! first `K` coefficients of every column are concatenated into a `K·d`
//! vector. Average, max and word-level DCT pooling are provided as
//! baselines, together with a small probing harness (synthetic tasks plus a
//! softmax classifier) and the `dctsent` command-line tool.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`, which is what the tools use.

pub mod bench;
pub mod cli;
pub mod dct;
pub mod encoder;
pub mod format;
pub mod lexicon;
pub mod probe;
mod scalar;

pub use dct::{DctError, DctPlan};
pub use encoder::{
    encode_avg, encode_dct, encode_dct_star, encode_max, relate_c0_avg, EncodeError, Encoder,
    PoolingMethod, SentenceEmbedding, SentenceMatrix, DEFAULT_MAX_K,
};
pub use lexicon::{
    embed_tokens, load_table, tokenize, LexiconError, OovPolicy, TokenizedSentence, Tokenizer,
    WordEmbeddingTable,
};
pub use scalar::Scalar;

pub type DctPlan64 = DctPlan<f64>;
pub type DctPlan32 = DctPlan<f32>;
pub type SentenceMatrix64 = SentenceMatrix<f64>;
pub type SentenceMatrix32 = SentenceMatrix<f32>;
pub type SentenceEmbedding64 = SentenceEmbedding<f64>;
pub type Encoder64 = Encoder<f64>;
pub type Classifier64 = probe::ClassifierModel<f64>;
