//! Seeded stand-in word vectors for synthetic probing runs.
//!
//! Each token gets i.i.d. standard-normal components plus a shared offset of
//! unit norm. The offset plays the role of the nonzero mean of real
//! embeddings, which is what lets pooled vectors carry length information.
//! A token's vector depends only on the token and the seed, not on which
//! other tokens are requested.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::lexicon::{OovPolicy, WordEmbeddingTable};

const OFFSET_STREAM: u64 = 0x6f66_6673_6574;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// The shared unit-norm offset for `seed`.
pub fn offset_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ OFFSET_STREAM);
    let raw: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    raw.into_iter().map(|x| x / norm).collect()
}

pub fn token_vector(token: &str, dim: usize, seed: u64, offset: &[f64]) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(fnv1a(token.as_bytes())));
    offset
        .iter()
        .take(dim)
        .map(|o| (rng.sample::<f64, _>(StandardNormal) + o) as f32)
        .collect()
}

/// A table of synthetic vectors for `tokens`.
pub fn synthetic_table<'a>(
    tokens: impl IntoIterator<Item = &'a str>,
    dim: usize,
    seed: u64,
) -> WordEmbeddingTable {
    let offset = offset_vector(dim, seed);
    let mut table = WordEmbeddingTable::new(dim, OovPolicy::Skip);
    for token in tokens {
        if table.lookup(token).is_none() {
            table.insert(token, &token_vector(token, dim, seed, &offset));
        }
    }
    table
}
