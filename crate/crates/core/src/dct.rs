//! Orthogonal DCT-II over short real sequences.
//!
//! The transform of a length-`N` sequence `v` is
//!
//! ```text
//! c[k] = s(k, N) · Σ_n v[n] · cos(π/N · (n + ½) · k)
//! s(0, N) = √(1/N),   s(k ≥ 1, N) = √(2/N)
//! ```
//!
//! With these scale factors the `N × N` basis matrix is orthogonal, so the
//! inverse is multiplication by its transpose. Sentences are short, so the
//! direct `O(K·N)` evaluation against a cached cosine table is used instead
//! of an FFT-based algorithm.

use std::sync::OnceLock;

use thiserror::Error;

use crate::scalar::{all_finite, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DctError {
    #[error("plan length must be at least 1")]
    ZeroPlanLength,
    #[error("sequence is empty")]
    EmptySequence,
    #[error("sequence length {len} exceeds plan maximum {max_len}")]
    TooLong { len: usize, max_len: usize },
    #[error("coefficient count {k_count} is outside 1..={len}")]
    BadCoefficientCount { k_count: usize, len: usize },
    #[error("sequence contains a non-finite value")]
    NonFinite,
}

/// Precomputed scaled cosine tables for every length up to `max_len`.
///
/// Tables are built lazily on first use of a length and memoized; a plan is
/// `Sync` and can be shared between threads, and concurrent first use of the
/// same length produces a single table.
pub struct DctPlan<T> {
    max_len: usize,
    // tables[len - 1] holds the row-major len × len basis.
    tables: Box<[OnceLock<Box<[T]>>]>,
}

impl<T: Scalar> DctPlan<T> {
    pub fn new(max_len: usize) -> Result<Self, DctError> {
        if max_len == 0 {
            return Err(DctError::ZeroPlanLength);
        }
        let tables = (0..max_len).map(|_| OnceLock::new()).collect();
        Ok(Self { max_len, tables })
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Number of lengths whose table has been materialized so far.
    pub fn cached_lengths(&self) -> usize {
        self.tables.iter().filter(|t| t.get().is_some()).count()
    }

    /// Row-major `len × len` basis; entry `[k * len + n]` is
    /// `s(k, len) · cos(π/len · (n + ½) · k)`.
    pub fn basis(&self, len: usize) -> Result<&[T], DctError> {
        self.check_len(len)?;
        Ok(self.tables[len - 1].get_or_init(|| build_basis(len)))
    }

    /// Basis row `k` for sequences of length `len`.
    pub fn basis_row(&self, len: usize, k: usize) -> Result<&[T], DctError> {
        if k >= len {
            return Err(DctError::BadCoefficientCount { k_count: k + 1, len });
        }
        let table = self.basis(len)?;
        Ok(&table[k * len..(k + 1) * len])
    }

    /// All `N` coefficients of `seq`.
    pub fn forward(&self, seq: &[T]) -> Result<Vec<T>, DctError> {
        self.truncated(seq, seq.len().max(1))
    }

    /// The first `k_count` coefficients of `seq`, without computing the rest.
    ///
    /// Each coefficient is accumulated in ascending `n`, so the result is a
    /// bit-exact prefix of [`DctPlan::forward`].
    pub fn truncated(&self, seq: &[T], k_count: usize) -> Result<Vec<T>, DctError> {
        let len = seq.len();
        self.check_len(len)?;
        if k_count == 0 || k_count > len {
            return Err(DctError::BadCoefficientCount { k_count, len });
        }
        if !all_finite(seq) {
            return Err(DctError::NonFinite);
        }
        let table = self.basis(len)?;
        Ok(table
            .chunks_exact(len)
            .take(k_count)
            .map(|row| dot(row, seq))
            .collect())
    }

    /// Inverse transform (multiplication by the transposed basis).
    pub fn inverse(&self, coeffs: &[T]) -> Result<Vec<T>, DctError> {
        let len = coeffs.len();
        self.check_len(len)?;
        if !all_finite(coeffs) {
            return Err(DctError::NonFinite);
        }
        let table = self.basis(len)?;
        let mut out = vec![T::zero(); len];
        for (row, &c) in table.chunks_exact(len).zip(coeffs) {
            for (o, &b) in out.iter_mut().zip(row) {
                *o = *o + b * c;
            }
        }
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<(), DctError> {
        if len == 0 {
            Err(DctError::EmptySequence)
        } else if len > self.max_len {
            Err(DctError::TooLong {
                len,
                max_len: self.max_len,
            })
        } else {
            Ok(())
        }
    }
}

impl<T> std::fmt::Debug for DctPlan<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DctPlan")
            .field("max_len", &self.max_len)
            .finish_non_exhaustive()
    }
}

fn build_basis<T: Scalar>(len: usize) -> Box<[T]> {
    let n_f = len as f64;
    let dc = (1.0 / n_f).sqrt();
    let ac = (2.0 / n_f).sqrt();
    let step = std::f64::consts::PI / n_f;
    let mut table = Vec::with_capacity(len * len);
    for k in 0..len {
        for n in 0..len {
            let value = if k == 0 {
                dc
            } else {
                ac * (step * (n as f64 + 0.5) * k as f64).cos()
            };
            table.push(T::of(value));
        }
    }
    table.into_boxed_slice()
}

#[inline]
fn dot<T: Scalar>(row: &[T], seq: &[T]) -> T {
    row.iter()
        .zip(seq)
        .fold(T::zero(), |acc, (&b, &v)| acc + b * v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < tol, "got {got:?}, want {want:?}");
        }
    }

    #[test]
    fn small_plans() {
        let plan = DctPlan::<f64>::new(4).unwrap();
        assert_eq!(plan.basis(1).unwrap(), &[1.0]);
        let half = 0.5f64.sqrt();
        assert_close(&plan.basis(2).unwrap()[..2], &[half, half], 1e-15);
        assert!((plan.basis(4).unwrap()[4] - 0.6532814824381883).abs() < 1e-12);
        assert_eq!(DctPlan::<f64>::new(0).unwrap_err(), DctError::ZeroPlanLength);
    }

    #[test]
    fn forward_examples() {
        let plan = DctPlan::<f64>::new(8).unwrap();
        assert_close(&plan.forward(&[1.0, 1.0, 1.0, 1.0]).unwrap(), &[2.0, 0.0, 0.0, 0.0], 1e-12);
        assert_eq!(plan.forward(&[5.0]).unwrap(), vec![5.0]);
        assert_close(
            &plan.forward(&[1.0, 2.0, 3.0, 4.0]).unwrap(),
            &[5.0, -2.230442497387663, 0.0, -0.15851266778110815],
            1e-12,
        );
    }

    #[test]
    fn inverse_examples() {
        let plan = DctPlan::<f64>::new(8).unwrap();
        let c = plan.forward(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_close(&plan.inverse(&c).unwrap(), &[1.0, 2.0, 3.0, 4.0], 1e-10);
        assert_close(&plan.inverse(&[2.0, 0.0, 0.0, 0.0]).unwrap(), &[1.0; 4], 1e-12);
        assert_eq!(plan.inverse(&[0.0; 5]).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn truncated_examples() {
        let plan = DctPlan::<f64>::new(8).unwrap();
        assert_close(&plan.truncated(&[1.0, 2.0, 3.0, 4.0], 1).unwrap(), &[5.0], 1e-12);
        assert_close(&plan.truncated(&[1.0; 4], 2).unwrap(), &[2.0, 0.0], 1e-12);
        assert_close(
            &plan.truncated(&[1.0, 2.0, 3.0, 4.0], 2).unwrap(),
            &[5.0, -2.230442497387663],
            1e-12,
        );
    }

    #[test]
    fn domain_errors() {
        let plan = DctPlan::<f64>::new(3).unwrap();
        assert_eq!(plan.forward(&[]).unwrap_err(), DctError::EmptySequence);
        assert_eq!(plan.inverse(&[]).unwrap_err(), DctError::EmptySequence);
        assert_eq!(
            plan.forward(&[1.0; 4]).unwrap_err(),
            DctError::TooLong { len: 4, max_len: 3 }
        );
        assert_eq!(
            plan.truncated(&[1.0, 2.0], 0).unwrap_err(),
            DctError::BadCoefficientCount { k_count: 0, len: 2 }
        );
        assert_eq!(
            plan.truncated(&[1.0, 2.0], 3).unwrap_err(),
            DctError::BadCoefficientCount { k_count: 3, len: 2 }
        );
        assert_eq!(plan.forward(&[1.0, f64::NAN]).unwrap_err(), DctError::NonFinite);
    }

    #[test]
    fn tables_are_lazy_and_orthogonal() {
        let plan = DctPlan::<f64>::new(64).unwrap();
        assert_eq!(plan.cached_lengths(), 0);
        for len in 1..=64 {
            let b = plan.basis(len).unwrap();
            for i in 0..len {
                assert!((b[i] - (1.0 / len as f64).sqrt()).abs() < 1e-15);
                for j in 0..len {
                    let dot: f64 = (0..len).map(|n| b[i * len + n] * b[j * len + n]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-10, "len {len} ({i},{j}) = {dot}");
                }
            }
        }
        assert_eq!(plan.cached_lengths(), 64);
    }

    #[test]
    fn concurrent_first_use_yields_one_table() {
        let plan = DctPlan::<f64>::new(32).unwrap();
        let ptrs: Vec<usize> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..8)
                .map(|_| s.spawn(|| plan.basis(32).unwrap().as_ptr() as usize))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert!(ptrs.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(plan.cached_lengths(), 1);
    }

    #[test]
    fn f32_plan_tracks_f64() {
        let p32 = DctPlan::<f32>::new(8).unwrap();
        let c = p32.forward(&[1.0f32, 2.0, 3.0, 4.0]).unwrap();
        assert!((c[1] as f64 + 2.230442497387663).abs() < 1e-5);
    }
}
