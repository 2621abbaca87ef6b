//! Encoding throughput measurement.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::encoder::{EncodeError, Encoder, PoolingMethod, SentenceMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: PoolingMethod,
    /// Median wall time per sentence over the timed repetitions.
    pub ns_per_sentence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub sentences: usize,
    pub repetitions: usize,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn avg_ns(&self) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == PoolingMethod::Avg)
            .map(|r| r.ns_per_sentence)
    }

    /// `(K, ns/sentence)` for the DCT rows.
    pub fn dct_points(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| match r.method {
                PoolingMethod::Dct { k } => Some((k as f64, r.ns_per_sentence)),
                _ => None,
            })
            .collect()
    }

    pub fn dct_fit(&self) -> Option<LinearFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self.dct_points().into_iter().unzip();
        LinearFit::fit(&xs, &ys)
    }
}

/// Ordinary least-squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    /// `None` for fewer than two points or constant `x`.
    pub fn fit(xs: &[f64], ys: &[f64]) -> Option<Self> {
        let n = xs.len();
        if n < 2 || n != ys.len() {
            return None;
        }
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        if sxx == 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
        Some(Self {
            slope,
            intercept,
            r_squared,
        })
    }
}

/// Random sentence matrices with lengths uniform in `min_len..=max_len`.
pub fn synthetic_corpus<T: Scalar>(
    sentences: usize,
    dim: usize,
    min_len: usize,
    max_len: usize,
    seed: u64,
) -> Vec<SentenceMatrix<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut row = vec![T::zero(); dim];
    (0..sentences)
        .map(|_| {
            let len = rng.random_range(min_len..=max_len);
            let mut m = SentenceMatrix::new(dim).expect("dim > 0");
            for _ in 0..len {
                for x in row.iter_mut() {
                    *x = T::of(rng.sample(StandardNormal));
                }
                m.push_row(&row).expect("finite row");
            }
            m
        })
        .collect()
}

fn time_pass<T: Scalar>(encoder: &Encoder<T>, corpus: &[SentenceMatrix<T>]) -> Result<f64, EncodeError> {
    let start = Instant::now();
    for m in corpus {
        black_box(encoder.encode(black_box(m))?);
    }
    Ok(start.elapsed().as_nanos() as f64)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Time AVG pooling and DCT pooling at every `K` in `ks` over `corpus`,
/// single-threaded: one warm-up pass, then `repetitions` timed passes per
/// method with the median reported. Repetitions are interleaved across
/// methods so slow drift in machine load affects every row alike.
pub fn run_bench<T: Scalar>(
    corpus: &[SentenceMatrix<T>],
    ks: &[usize],
    repetitions: usize,
) -> Result<BenchReport, EncodeError> {
    assert!(!corpus.is_empty(), "empty corpus");
    assert!(repetitions > 0);
    let max_len = corpus.iter().map(SentenceMatrix::n_rows).max().unwrap_or(1);
    let mut encoders = vec![Encoder::new(PoolingMethod::Avg, max_len.max(1))?];
    for &k in ks {
        encoders.push(Encoder::new(PoolingMethod::Dct { k }, max_len.max(k))?);
    }
    for e in &encoders {
        time_pass(e, corpus)?;
    }
    let mut samples = vec![Vec::with_capacity(repetitions); encoders.len()];
    for _ in 0..repetitions {
        for (e, s) in encoders.iter().zip(samples.iter_mut()) {
            s.push(time_pass(e, corpus)?);
        }
    }
    let per = corpus.len() as f64;
    let rows = encoders
        .iter()
        .zip(samples)
        .map(|(e, s)| BenchRow {
            method: e.method(),
            ns_per_sentence: median(s) / per,
        })
        .collect();
    Ok(BenchReport {
        sentences: corpus.len(),
        repetitions,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_exact_line() {
        let f = LinearFit::fit(&[1.0, 2.0, 3.0, 4.0], &[3.0, 5.0, 7.0, 9.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_against_hand_computation() {
        // x̄ = 2, ȳ = 2; Sxx = 2, Sxy = 1, Syy = 2 → slope ½, R² = ¼.
        let f = LinearFit::fit(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 0.25).abs() < 1e-12);
        assert!(LinearFit::fit(&[1.0], &[1.0]).is_none());
        assert!(LinearFit::fit(&[2.0, 2.0], &[1.0, 3.0]).is_none());
    }

    #[test]
    fn report_shape() {
        let corpus = synthetic_corpus::<f64>(20, 4, 1, 10, 0);
        let report = run_bench(&corpus, &[1, 2, 3, 4, 5, 6, 7], 5).unwrap();
        assert_eq!(report.rows.len(), 8);
        assert_eq!(report.dct_points().len(), 7);
        assert!(report.avg_ns().unwrap() > 0.0);
    }

    #[test]
    fn corpus_lengths() {
        let corpus = synthetic_corpus::<f32>(50, 3, 2, 5, 9);
        assert!(corpus.iter().all(|m| (2..=5).contains(&m.n_rows()) && m.dim() == 3));
        assert_eq!(corpus, synthetic_corpus::<f32>(50, 3, 2, 5, 9));
    }
}
