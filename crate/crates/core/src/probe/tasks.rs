//! Seeded generators for the synthetic probing tasks.
//!
//! Tokens are named `w<id>` for ids in `0..vocab_size`. Each generator is a
//! pure function of its parameters: the same parameters (seed included)
//! always yield the same dataset.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::dataset::{LabeledSentence, ProbingDataset, Split, Task};
use super::ProbeError;

pub fn token_name(id: usize) -> String {
    format!("w{id}")
}

/// Length prediction: the label is the index of the length bucket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SentLenParams {
    pub vocab_size: usize,
    pub buckets: Vec<(usize, usize)>,
    pub per_bucket: usize,
    pub seed: u64,
}

impl Default for SentLenParams {
    fn default() -> Self {
        Self {
            vocab_size: 200,
            buckets: vec![(1, 4), (5, 8), (9, 12), (13, 16), (17, 20), (21, 24)],
            per_bucket: 200,
            seed: 0,
        }
    }
}

/// Word content: every sentence holds exactly one of `target_words`
/// designated words (ids `0..target_words`) among filler words; the label is
/// that word's id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WcParams {
    pub vocab_size: usize,
    pub target_words: usize,
    pub per_word: usize,
    pub sent_len: usize,
    pub seed: u64,
}

impl Default for WcParams {
    fn default() -> Self {
        Self {
            vocab_size: 200,
            target_words: 10,
            per_word: 100,
            sent_len: 8,
            seed: 0,
        }
    }
}

/// Word order: originals (label 0) and copies with one adjacent pair of
/// distinct tokens swapped (label 1).
///
/// Base sentences follow a positional template: the vocabulary is cut into
/// `sent_len` contiguous word classes and position `n` draws from class `n`.
/// Without some such regularity an adjacent swap of an i.i.d. sentence is
/// distributed exactly like an original and the task carries no signal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BShiftParams {
    pub base_sentences: usize,
    pub sent_len: usize,
    pub vocab_size: usize,
    pub seed: u64,
}

impl Default for BShiftParams {
    fn default() -> Self {
        Self {
            base_sentences: 1000,
            sent_len: 6,
            vocab_size: 48,
            seed: 0,
        }
    }
}

fn invalid(msg: impl Into<String>) -> ProbeError {
    ProbeError::InvalidParams(msg.into())
}

fn finish(task: Task, label_count: usize, mut units: Vec<Vec<(usize, Vec<String>)>>, rng: &mut ChaCha8Rng) -> ProbingDataset {
    units.shuffle(rng);
    let n = units.len();
    let examples = units
        .into_iter()
        .enumerate()
        .flat_map(|(i, unit)| {
            let split = Split::for_position(i, n);
            unit.into_iter()
                .map(move |(label, tokens)| LabeledSentence { split, label, tokens })
        })
        .collect();
    ProbingDataset {
        task: Some(task),
        examples,
        label_count,
    }
}

pub fn gen_sentlen(params: &SentLenParams) -> Result<ProbingDataset, ProbeError> {
    let SentLenParams { vocab_size, ref buckets, per_bucket, seed } = *params;
    if buckets.is_empty() {
        return Err(invalid("no length buckets"));
    }
    if vocab_size < 2 {
        return Err(invalid("vocab_size must be at least 2"));
    }
    if per_bucket == 0 {
        return Err(invalid("per_bucket must be at least 1"));
    }
    for &(lo, hi) in buckets {
        if lo == 0 || lo > hi {
            return Err(invalid(format!("empty length bucket ({lo}, {hi})")));
        }
    }
    let mut sorted = buckets.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[1].0 <= w[0].1) {
        return Err(invalid("length buckets overlap"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut units = Vec::with_capacity(buckets.len() * per_bucket);
    for (label, &(lo, hi)) in buckets.iter().enumerate() {
        for _ in 0..per_bucket {
            let len = rng.random_range(lo..=hi);
            let tokens = (0..len).map(|_| token_name(rng.random_range(0..vocab_size))).collect();
            units.push(vec![(label, tokens)]);
        }
    }
    Ok(finish(Task::SentLen, buckets.len(), units, &mut rng))
}

pub fn gen_wc(params: &WcParams) -> Result<ProbingDataset, ProbeError> {
    let WcParams { vocab_size, target_words, per_word, sent_len, seed } = *params;
    if sent_len < 1 {
        return Err(invalid("sent_len must be at least 1"));
    }
    if target_words == 0 || target_words > vocab_size {
        return Err(invalid(format!(
            "target_words must be in 1..={vocab_size}, got {target_words}"
        )));
    }
    if sent_len > 1 && target_words == vocab_size {
        return Err(invalid("no filler words left: vocab_size must exceed target_words"));
    }
    if per_word == 0 {
        return Err(invalid("per_word must be at least 1"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut units = Vec::with_capacity(target_words * per_word);
    for target in 0..target_words {
        for _ in 0..per_word {
            let slot = rng.random_range(0..sent_len);
            let tokens = (0..sent_len)
                .map(|i| {
                    if i == slot {
                        token_name(target)
                    } else {
                        token_name(rng.random_range(target_words..vocab_size))
                    }
                })
                .collect();
            units.push(vec![(target, tokens)]);
        }
    }
    Ok(finish(Task::Wc, target_words, units, &mut rng))
}

pub fn gen_bshift(params: &BShiftParams) -> Result<ProbingDataset, ProbeError> {
    let BShiftParams { base_sentences, sent_len, vocab_size, seed } = *params;
    if sent_len < 3 {
        return Err(invalid("sent_len must be at least 3"));
    }
    if vocab_size < sent_len {
        return Err(invalid(format!(
            "vocab_size {vocab_size} cannot form {sent_len} positional word classes"
        )));
    }
    if base_sentences == 0 {
        return Err(invalid("base_sentences must be at least 1"));
    }

    let class_size = vocab_size / sent_len;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut units = Vec::with_capacity(base_sentences);
    for _ in 0..base_sentences {
        let ids: Vec<usize> = (0..sent_len)
            .map(|pos| pos * class_size + rng.random_range(0..class_size))
            .collect();
        let swappable: Vec<usize> = (0..sent_len - 1).filter(|&p| ids[p] != ids[p + 1]).collect();
        // Distinct classes make every adjacent pair distinct.
        let p = swappable[rng.random_range(0..swappable.len())];
        let mut shifted = ids.clone();
        shifted.swap(p, p + 1);
        let names = |v: &[usize]| v.iter().map(|&i| token_name(i)).collect::<Vec<_>>();
        units.push(vec![(0, names(&ids)), (1, names(&shifted))]);
    }
    Ok(finish(Task::BShift, 2, units, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentlen_examples() {
        let p = SentLenParams {
            vocab_size: 10,
            buckets: vec![(1, 4), (5, 8)],
            per_bucket: 10,
            seed: 3,
        };
        let ds = gen_sentlen(&p).unwrap();
        assert_eq!((ds.len(), ds.label_count), (20, 2));
        for e in &ds.examples {
            let (lo, hi) = p.buckets[e.label];
            assert!((lo..=hi).contains(&e.tokens.len()));
        }
        assert_eq!(gen_sentlen(&p).unwrap(), ds);
    }

    #[test]
    fn sentlen_rejects_bad_buckets() {
        let base = SentLenParams::default();
        for buckets in [vec![], vec![(3, 2)], vec![(0, 2)], vec![(1, 5), (5, 8)]] {
            let p = SentLenParams { buckets, ..base.clone() };
            assert!(matches!(gen_sentlen(&p), Err(ProbeError::InvalidParams(_))));
        }
        let p = SentLenParams { vocab_size: 1, ..base };
        assert!(gen_sentlen(&p).is_err());
    }

    #[test]
    fn wc_examples() {
        let p = WcParams { vocab_size: 30, target_words: 5, per_word: 20, sent_len: 6, seed: 1 };
        let ds = gen_wc(&p).unwrap();
        assert_eq!((ds.len(), ds.label_count), (100, 5));
        for e in &ds.examples {
            assert_eq!(e.tokens.len(), 6);
            let targets: Vec<_> = e
                .tokens
                .iter()
                .filter(|t| t[1..].parse::<usize>().unwrap() < 5)
                .collect();
            assert_eq!(targets, vec![&token_name(e.label)]);
        }
        assert_eq!(gen_wc(&p).unwrap(), ds);
        assert!(gen_wc(&WcParams { sent_len: 0, ..p.clone() }).is_err());
        assert!(gen_wc(&WcParams { target_words: 31, ..p.clone() }).is_err());
        assert!(gen_wc(&WcParams { target_words: 30, ..p }).is_err());
    }

    #[test]
    fn bshift_examples() {
        let p = BShiftParams { base_sentences: 50, sent_len: 6, vocab_size: 48, seed: 9 };
        let ds = gen_bshift(&p).unwrap();
        assert_eq!(ds.len(), 100);
        assert_eq!(ds.examples.iter().filter(|e| e.label == 1).count(), 50);
        for pair in ds.examples.chunks(2) {
            let (orig, swapped) = (&pair[0], &pair[1]);
            assert_eq!((orig.label, swapped.label), (0, 1));
            assert_eq!(orig.split, swapped.split);
            let diff: Vec<usize> =
                (0..6).filter(|&i| orig.tokens[i] != swapped.tokens[i]).collect();
            assert_eq!(diff.len(), 2);
            assert_eq!(diff[1], diff[0] + 1);
            let mut a = orig.tokens.clone();
            let mut b = swapped.tokens.clone();
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
        assert_eq!(gen_bshift(&p).unwrap(), ds);
        assert!(gen_bshift(&BShiftParams { sent_len: 2, ..p.clone() }).is_err());
        assert!(gen_bshift(&BShiftParams { vocab_size: 5, ..p }).is_err());
    }

    #[test]
    fn different_seeds_differ() {
        let a = gen_bshift(&BShiftParams { seed: 1, ..Default::default() }).unwrap();
        let b = gen_bshift(&BShiftParams { seed: 2, ..Default::default() }).unwrap();
        assert_ne!(a, b);
    }
}
