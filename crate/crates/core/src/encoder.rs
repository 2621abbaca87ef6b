//! Fixed-length sentence vectors from stacked word vectors.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::dct::{DctError, DctPlan};
use crate::scalar::{all_finite, Scalar};

/// Largest `K` accepted unless the caller opts out of the guardrail.
pub const DEFAULT_MAX_K: usize = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodeError {
    #[error("embedding dimension must be at least 1")]
    ZeroDim,
    #[error("row has {got} entries, expected {expected}")]
    RowLength { expected: usize, got: usize },
    #[error("row contains a non-finite value")]
    NonFinite,
    #[error("coefficient count must be at least 1")]
    ZeroK,
    #[error("K = {k} is outside the supported range 1..={max}")]
    KOutOfRange { k: usize, max: usize },
    #[error("{method} pooling of an empty sentence is undefined")]
    EmptySentence { method: &'static str },
    #[error("word-level DCT keeps {k} coefficients but words have only {dim} dimensions")]
    KExceedsDim { k: usize, dim: usize },
    #[error(transparent)]
    Dct(#[from] DctError),
}

/// `N × d` matrix of word vectors in sentence order. `N` may be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SentenceMatrix<T> {
    pub fn new(dim: usize) -> Result<Self, EncodeError> {
        if dim == 0 {
            return Err(EncodeError::ZeroDim);
        }
        Ok(Self { dim, data: Vec::new() })
    }

    pub fn from_rows<R: AsRef<[T]>>(dim: usize, rows: &[R]) -> Result<Self, EncodeError> {
        let mut mat = Self::new(dim)?;
        for row in rows {
            mat.push_row(row.as_ref())?;
        }
        Ok(mat)
    }

    pub fn push_row(&mut self, row: &[T]) -> Result<(), EncodeError> {
        if row.len() != self.dim {
            return Err(EncodeError::RowLength {
                expected: self.dim,
                got: row.len(),
            });
        }
        if !all_finite(row) {
            return Err(EncodeError::NonFinite);
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    /// Feature column `j` as an owned sequence.
    pub fn column(&self, j: usize) -> Vec<T> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * self.dim);
        head[lo * self.dim..(lo + 1) * self.dim].swap_with_slice(&mut tail[..self.dim]);
    }

    /// Rows reordered so that row `i` of the result is row `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        Self { dim: self.dim, data }
    }

    /// Copy with zero rows appended until there are at least `rows` rows.
    pub fn zero_padded(&self, rows: usize) -> Self {
        let mut data = self.data.clone();
        if rows > self.n_rows() {
            data.resize(rows * self.dim, T::zero());
        }
        Self { dim: self.dim, data }
    }

    /// Keep only the first `rows` rows.
    pub fn truncate(&mut self, rows: usize) {
        self.data.truncate(rows * self.dim);
    }
}

/// Pooling method and, for the DCT variants, the number of coefficients kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PoolingMethod {
    Dct { k: usize },
    Avg,
    Max,
    DctStar { k: usize },
}

impl PoolingMethod {
    pub fn k(&self) -> Option<usize> {
        match *self {
            PoolingMethod::Dct { k } | PoolingMethod::DctStar { k } => Some(k),
            PoolingMethod::Avg | PoolingMethod::Max => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PoolingMethod::Dct { .. } => "dct",
            PoolingMethod::Avg => "avg",
            PoolingMethod::Max => "max",
            PoolingMethod::DctStar { .. } => "dct-star",
        }
    }

    /// Length of the sentence vector for `dim`-dimensional word vectors.
    pub fn output_len(&self, dim: usize) -> usize {
        match *self {
            PoolingMethod::Dct { k } => k * dim,
            PoolingMethod::Avg | PoolingMethod::Max => dim,
            PoolingMethod::DctStar { k } => k,
        }
    }

    /// Reject `K` outside `1..=max_k`.
    pub fn check_k(&self, max_k: usize) -> Result<(), EncodeError> {
        match self.k() {
            Some(0) => Err(EncodeError::ZeroK),
            Some(k) if k > max_k => Err(EncodeError::KOutOfRange { k, max: max_k }),
            _ => Ok(()),
        }
    }

    /// Build from a method name and an optional `K`.
    pub fn from_parts(name: &str, k: Option<usize>) -> Result<Self, String> {
        match (name, k) {
            ("dct", Some(k)) => Ok(PoolingMethod::Dct { k }),
            ("dct-star", Some(k)) => Ok(PoolingMethod::DctStar { k }),
            ("dct" | "dct-star", None) => Err(format!("method {name} requires --k")),
            ("avg", None) => Ok(PoolingMethod::Avg),
            ("max", None) => Ok(PoolingMethod::Max),
            ("avg" | "max", Some(_)) => Err(format!("method {name} does not take --k")),
            _ => Err(format!("unknown pooling method {name:?}")),
        }
    }
}

impl fmt::Display for PoolingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.k() {
            Some(k) => write!(f, "{}({k})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for PoolingMethod {
    type Err = String;

    /// Parses `avg`, `max`, `dct(K)` or `dct-star(K)`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once('(') {
            Some((name, rest)) => {
                let k = rest
                    .strip_suffix(')')
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| format!("malformed method {s:?}"))?;
                Self::from_parts(name, Some(k))
            }
            None => Self::from_parts(s, None),
        }
    }
}

/// A pooled sentence vector tagged with the method that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbedding<T> {
    pub values: Vec<T>,
    pub method: PoolingMethod,
}

impl<T> SentenceEmbedding<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn k_count(&self) -> Option<usize> {
        self.method.k()
    }
}

/// DCT pooling with `k_count` coefficients per feature, coefficient-major:
/// `values[k * d + j]` is coefficient `k` of feature column `j`.
///
/// Sentences shorter than `k_count` are padded with zero rows so that the
/// transform length is exactly `k_count`; an empty sentence therefore maps to
/// the zero vector.
pub fn encode_dct<T: Scalar>(
    plan: &DctPlan<T>,
    mat: &SentenceMatrix<T>,
    k_count: usize,
) -> Result<SentenceEmbedding<T>, EncodeError> {
    if k_count == 0 {
        return Err(EncodeError::ZeroK);
    }
    let dim = mat.dim();
    let n = mat.n_rows();
    let len = n.max(k_count);
    let basis = plan.basis(len)?;
    let mut out = vec![T::zero(); k_count * dim];
    for (row, block) in basis.chunks_exact(len).zip(out.chunks_exact_mut(dim)) {
        // Padding rows are accumulated as explicit zeros so the result is
        // bit-identical to transforming a zero-padded matrix.
        for (i, &w) in row.iter().enumerate() {
            if i < n {
                for (acc, &x) in block.iter_mut().zip(mat.row(i)) {
                    *acc = *acc + w * x;
                }
            } else {
                for acc in block.iter_mut() {
                    *acc = *acc + w * T::zero();
                }
            }
        }
    }
    Ok(SentenceEmbedding {
        values: out,
        method: PoolingMethod::Dct { k: k_count },
    })
}

/// Column-wise arithmetic mean.
///
/// Rows are accumulated in lexicographic order, so the result is
/// bit-for-bit invariant under any permutation of the rows.
pub fn encode_avg<T: Scalar>(mat: &SentenceMatrix<T>) -> Result<SentenceEmbedding<T>, EncodeError> {
    if mat.is_empty() {
        return Err(EncodeError::EmptySentence { method: "avg" });
    }
    let mut order: Vec<&[T]> = mat.rows().collect();
    order.sort_unstable_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.partial_cmp(y).expect("finite entries"))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut values = vec![T::zero(); mat.dim()];
    for row in order {
        for (acc, &x) in values.iter_mut().zip(row) {
            *acc = *acc + x;
        }
    }
    let n = T::of_usize(mat.n_rows());
    for v in &mut values {
        *v = *v / n;
    }
    Ok(SentenceEmbedding {
        values,
        method: PoolingMethod::Avg,
    })
}

/// Column-wise maximum.
pub fn encode_max<T: Scalar>(mat: &SentenceMatrix<T>) -> Result<SentenceEmbedding<T>, EncodeError> {
    let mut rows = mat.rows();
    let first = rows.next().ok_or(EncodeError::EmptySentence { method: "max" })?;
    let mut out = first.to_vec();
    for row in rows {
        for (m, &x) in out.iter_mut().zip(row) {
            *m = m.max(x);
        }
    }
    Ok(SentenceEmbedding {
        values: out,
        method: PoolingMethod::Max,
    })
}

/// Word-level DCT baseline: each word vector is transformed along its own
/// embedding dimension, truncated to `k_count` coefficients, and the
/// per-word results are averaged. Output length is `k_count`.
pub fn encode_dct_star<T: Scalar>(
    plan: &DctPlan<T>,
    mat: &SentenceMatrix<T>,
    k_count: usize,
) -> Result<SentenceEmbedding<T>, EncodeError> {
    if k_count == 0 {
        return Err(EncodeError::ZeroK);
    }
    if k_count > mat.dim() {
        return Err(EncodeError::KExceedsDim {
            k: k_count,
            dim: mat.dim(),
        });
    }
    if mat.is_empty() {
        return Err(EncodeError::EmptySentence { method: "dct-star" });
    }
    let mut sum = vec![T::zero(); k_count];
    for row in mat.rows() {
        for (s, c) in sum.iter_mut().zip(plan.truncated(row, k_count)?) {
            *s = *s + c;
        }
    }
    let n = T::of_usize(mat.n_rows());
    Ok(SentenceEmbedding {
        values: sum.into_iter().map(|s| s / n).collect(),
        method: PoolingMethod::DctStar { k: k_count },
    })
}

/// Largest absolute deviation between the first DCT coefficient block and
/// `√N` times the average, for an unpadded sentence.
pub fn relate_c0_avg<T: Scalar>(mat: &SentenceMatrix<T>) -> Result<T, EncodeError> {
    let n = mat.n_rows();
    if n == 0 {
        return Err(EncodeError::EmptySentence { method: "avg" });
    }
    let plan = DctPlan::new(n)?;
    let c0 = encode_dct(&plan, mat, 1)?;
    let avg = encode_avg(mat)?;
    let root_n = T::of_usize(n).sqrt();
    Ok(c0
        .values
        .iter()
        .zip(&avg.values)
        .map(|(&c, &a)| (c - root_n * a).abs())
        .fold(T::zero(), T::max))
}

/// A pooling method bound to a plan.
#[derive(Debug)]
pub struct Encoder<T> {
    plan: DctPlan<T>,
    method: PoolingMethod,
}

impl<T: Scalar> Encoder<T> {
    /// Encoder whose plan covers sentences of up to `max_len` words (and, for
    /// word-level DCT, word vectors of up to `max_len` dimensions).
    pub fn new(method: PoolingMethod, max_len: usize) -> Result<Self, EncodeError> {
        method.check_k(usize::MAX)?;
        let need = method.k().unwrap_or(1).max(max_len);
        Ok(Self {
            plan: DctPlan::new(need)?,
            method,
        })
    }

    pub fn method(&self) -> PoolingMethod {
        self.method
    }

    pub fn plan(&self) -> &DctPlan<T> {
        &self.plan
    }

    pub fn encode(&self, mat: &SentenceMatrix<T>) -> Result<SentenceEmbedding<T>, EncodeError> {
        match self.method {
            PoolingMethod::Dct { k } => encode_dct(&self.plan, mat, k),
            PoolingMethod::Avg => encode_avg(mat),
            PoolingMethod::Max => encode_max(mat),
            PoolingMethod::DctStar { k } => encode_dct_star(&self.plan, mat, k),
        }
    }

    /// Encode many sentences in parallel; output order matches input order.
    pub fn encode_all(
        &self,
        mats: &[SentenceMatrix<T>],
    ) -> Vec<Result<SentenceEmbedding<T>, EncodeError>> {
        mats.par_iter().map(|m| self.encode(m)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> SentenceMatrix<f64> {
        SentenceMatrix::from_rows(rows[0].len(), rows).unwrap()
    }

    #[test]
    fn dct_examples() {
        let plan = DctPlan::new(16).unwrap();
        let m = mat(&[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]]);
        let e = encode_dct(&plan, &m, 1).unwrap();
        assert!((e.values[0] - 2.0).abs() < 1e-12 && (e.values[1] - 2.0).abs() < 1e-12);

        let empty = SentenceMatrix::<f64>::new(3).unwrap();
        assert_eq!(encode_dct(&plan, &empty, 2).unwrap().values, vec![0.0; 6]);

        let col = mat(&[&[1.0], &[2.0], &[3.0], &[4.0]]);
        let e = encode_dct(&plan, &col, 2).unwrap();
        assert!((e.values[0] - 5.0).abs() < 1e-12);
        assert!((e.values[1] + 2.230442497387663).abs() < 1e-12);
        assert_eq!(e.k_count(), Some(2));
    }

    #[test]
    fn dct_errors() {
        let plan = DctPlan::new(4).unwrap();
        let m = mat(&[&[1.0, 2.0]]);
        assert_eq!(encode_dct(&plan, &m, 0).unwrap_err(), EncodeError::ZeroK);
        assert!(matches!(
            encode_dct(&plan, &m, 5).unwrap_err(),
            EncodeError::Dct(DctError::TooLong { len: 5, max_len: 4 })
        ));
    }

    #[test]
    fn avg_and_max_examples() {
        assert_eq!(encode_avg(&mat(&[&[1.0, 0.0], &[3.0, 2.0]])).unwrap().values, vec![2.0, 1.0]);
        assert_eq!(encode_avg(&mat(&[&[5.0, 5.0]])).unwrap().values, vec![5.0, 5.0]);
        assert_eq!(encode_max(&mat(&[&[1.0, 0.0], &[3.0, -2.0]])).unwrap().values, vec![3.0, 0.0]);
        assert_eq!(encode_max(&mat(&[&[-1.0, -1.0]])).unwrap().values, vec![-1.0, -1.0]);
        let empty = SentenceMatrix::<f64>::new(2).unwrap();
        assert!(matches!(encode_avg(&empty), Err(EncodeError::EmptySentence { .. })));
        assert!(matches!(encode_max(&empty), Err(EncodeError::EmptySentence { .. })));
    }

    #[test]
    fn dct_star_examples() {
        let plan = DctPlan::new(8).unwrap();
        let one = mat(&[&[1.0, 1.0, 1.0, 1.0]]);
        let e = encode_dct_star(&plan, &one, 1).unwrap();
        assert!((e.values[0] - 2.0).abs() < 1e-12);
        let two = mat(&[&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]]);
        let single = mat(&[&[1.0, 2.0, 3.0, 4.0]]);
        for k in 1..=4 {
            assert_eq!(
                encode_dct_star(&plan, &two, k).unwrap().values,
                encode_dct_star(&plan, &single, k).unwrap().values
            );
        }
        let e = encode_dct_star(&plan, &single, 2).unwrap();
        assert!((e.values[0] - 5.0).abs() < 1e-12);
        assert!((e.values[1] + 2.230442497387663).abs() < 1e-12);
        assert_eq!(
            encode_dct_star(&plan, &single, 5).unwrap_err(),
            EncodeError::KExceedsDim { k: 5, dim: 4 }
        );
    }

    #[test]
    fn c0_avg_relation() {
        let m = mat(&[&[1.0, 0.0], &[3.0, 2.0]]);
        assert!(relate_c0_avg(&m).unwrap() < 1e-12);
        let plan = DctPlan::new(2).unwrap();
        let c0 = encode_dct(&plan, &m, 1).unwrap().values;
        let r2 = 2f64.sqrt();
        assert!((c0[0] - 2.0 * r2).abs() < 1e-12 && (c0[1] - r2).abs() < 1e-12);
        let single = mat(&[&[0.25, -7.5, 3.0]]);
        assert_eq!(encode_dct(&plan, &single, 1).unwrap().values, single.row(0));
    }

    #[test]
    fn matrix_validation() {
        assert_eq!(SentenceMatrix::<f64>::new(0).unwrap_err(), EncodeError::ZeroDim);
        let mut m = SentenceMatrix::<f64>::new(2).unwrap();
        assert_eq!(
            m.push_row(&[1.0]).unwrap_err(),
            EncodeError::RowLength { expected: 2, got: 1 }
        );
        assert_eq!(m.push_row(&[1.0, f64::INFINITY]).unwrap_err(), EncodeError::NonFinite);
        m.push_row(&[1.0, 2.0]).unwrap();
        m.push_row(&[3.0, 4.0]).unwrap();
        m.swap_rows(0, 1);
        assert_eq!(m.row(0), &[3.0, 4.0]);
        assert_eq!(m.column(1), vec![4.0, 2.0]);
        assert_eq!(m.zero_padded(3).row(2), &[0.0, 0.0]);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("dct(3)".parse::<PoolingMethod>().unwrap(), PoolingMethod::Dct { k: 3 });
        assert_eq!("avg".parse::<PoolingMethod>().unwrap(), PoolingMethod::Avg);
        assert!(PoolingMethod::from_parts("dct", None).is_err());
        assert!(PoolingMethod::from_parts("max", Some(2)).is_err());
        assert_eq!(PoolingMethod::DctStar { k: 2 }.to_string(), "dct-star(2)");
        assert_eq!(PoolingMethod::Dct { k: 8 }.check_k(DEFAULT_MAX_K).unwrap_err(),
            EncodeError::KOutOfRange { k: 8, max: 7 });
        assert_eq!(PoolingMethod::Dct { k: 3 }.output_len(50), 150);
    }
}
