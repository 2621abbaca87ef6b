//! Softmax classifier with an optional tanh hidden layer, trained by
//! mini-batch SGD on cross-entropy.
//!
//! `hidden_size == 0` is multinomial logistic regression. Inputs are
//! standardized with per-feature statistics of the training set, which are
//! stored in the model and applied again at prediction time.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ProbeError;
use crate::scalar::Scalar;

/// Hidden-layer sizes searched by the probing protocol.
pub const HIDDEN_SIZES: [usize; 5] = [0, 50, 100, 200, 512];
/// Dropout rates searched by the probing protocol.
pub const DROPOUTS: [f64; 3] = [0.0, 0.1, 0.2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifierConfig {
    pub hidden_size: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            hidden_size: 0,
            dropout: 0.0,
            learning_rate: 0.05,
            epochs: 40,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), ProbeError> {
        let bad = |m: String| Err(ProbeError::InvalidConfig(m));
        if !HIDDEN_SIZES.contains(&self.hidden_size) {
            return bad(format!("hidden_size {} not in {HIDDEN_SIZES:?}", self.hidden_size));
        }
        if !DROPOUTS.contains(&self.dropout) {
            return bad(format!("dropout {} not in {DROPOUTS:?}", self.dropout));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be positive".into());
        }
        Ok(())
    }

    /// Every (hidden size, dropout) pair of the search space, other fields
    /// taken from `self`.
    pub fn full_grid(&self) -> Vec<Self> {
        self.grid(&HIDDEN_SIZES, &DROPOUTS)
    }

    pub fn grid(&self, hidden_sizes: &[usize], dropouts: &[f64]) -> Vec<Self> {
        hidden_sizes
            .iter()
            .flat_map(|&hidden_size| {
                dropouts.iter().map(move |&dropout| Self {
                    hidden_size,
                    dropout,
                    ..*self
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel<T> {
    input_dim: usize,
    hidden_size: usize,
    label_count: usize,
    shift: Vec<T>,
    scale: Vec<T>,
    w1: Vec<T>,
    b1: Vec<T>,
    w2: Vec<T>,
    b2: Vec<T>,
    trained: bool,
}

/// Per-example scratch buffers.
struct Scratch<T> {
    x: Vec<T>,
    hidden: Vec<T>,
    logits: Vec<T>,
    d_hidden: Vec<T>,
}

impl<T: Scalar> ClassifierModel<T> {
    /// Untrained model with identity input scaling and Glorot-uniform weights.
    pub fn init(input_dim: usize, hidden_size: usize, label_count: usize, seed: u64) -> Self {
        assert!(input_dim > 0 && label_count > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut glorot = |fan_in: usize, fan_out: usize| -> Vec<T> {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..fan_in * fan_out)
                .map(|_| T::of(rng.random_range(-limit..limit)))
                .collect()
        };
        let width = if hidden_size > 0 { hidden_size } else { input_dim };
        let w1 = if hidden_size > 0 { glorot(input_dim, hidden_size) } else { Vec::new() };
        let w2 = glorot(width, label_count);
        Self {
            input_dim,
            hidden_size,
            label_count,
            shift: vec![T::zero(); input_dim],
            scale: vec![T::one(); input_dim],
            w1,
            b1: vec![T::zero(); hidden_size],
            w2,
            b2: vec![T::zero(); label_count],
            trained: false,
        }
    }

    /// The model training starts from: standardization fitted to `features`
    /// and freshly initialized weights.
    pub fn initial(
        config: &ClassifierConfig,
        features: &[Vec<T>],
        labels: &[usize],
    ) -> Result<Self, ProbeError> {
        config.validate()?;
        let (dim, label_count) = check_training_set(features, labels)?;
        let mut model = Self::init(dim, config.hidden_size, label_count, config.seed);
        model.fit_standardization(features);
        Ok(model)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    fn width(&self) -> usize {
        if self.hidden_size > 0 {
            self.hidden_size
        } else {
            self.input_dim
        }
    }

    fn fit_standardization(&mut self, features: &[Vec<T>]) {
        let n = T::of_usize(features.len());
        for j in 0..self.input_dim {
            let mean = features.iter().map(|f| f[j]).sum::<T>() / n;
            let var = features.iter().map(|f| (f[j] - mean).powi(2)).sum::<T>() / n;
            let sd = var.sqrt();
            self.shift[j] = mean;
            self.scale[j] = if sd > T::of(1e-12) { T::one() / sd } else { T::one() };
        }
    }

    fn scratch(&self) -> Scratch<T> {
        Scratch {
            x: vec![T::zero(); self.input_dim],
            hidden: vec![T::zero(); self.hidden_size],
            logits: vec![T::zero(); self.label_count],
            d_hidden: vec![T::zero(); self.hidden_size],
        }
    }

    /// Fills `s.x`, `s.hidden` (post-dropout) and `s.logits`.
    fn forward(&self, input: &[T], mask: Option<&[T]>, s: &mut Scratch<T>) {
        for (j, x) in s.x.iter_mut().enumerate() {
            *x = (input[j] - self.shift[j]) * self.scale[j];
        }
        if self.hidden_size > 0 {
            for (h, out) in s.hidden.iter_mut().enumerate() {
                let row = &self.w1[h * self.input_dim..(h + 1) * self.input_dim];
                let pre = dot(row, &s.x) + self.b1[h];
                *out = pre.tanh();
                if let Some(m) = mask {
                    *out = *out * m[h];
                }
            }
        }
        let width = self.width();
        let act = if self.hidden_size > 0 { &s.hidden } else { &s.x };
        for (c, logit) in s.logits.iter_mut().enumerate() {
            *logit = dot(&self.w2[c * width..(c + 1) * width], act) + self.b2[c];
        }
    }

    pub fn logits(&self, input: &[T]) -> Vec<T> {
        let mut s = self.scratch();
        self.forward(input, None, &mut s);
        s.logits
    }

    /// Argmax label; ties go to the lowest index.
    pub fn predict(&self, input: &[T]) -> usize {
        argmax(&self.logits(input))
    }

    /// Mean cross-entropy over `(features, labels)` without dropout.
    pub fn loss(&self, features: &[Vec<T>], labels: &[usize]) -> T {
        let mut s = self.scratch();
        let total: T = features
            .iter()
            .zip(labels)
            .map(|(f, &y)| {
                self.forward(f, None, &mut s);
                cross_entropy(&s.logits, y)
            })
            .sum();
        total / T::of_usize(features.len().max(1))
    }

    /// All weights and biases, flattened as `[w1, b1, w2, b2]`.
    pub fn parameters(&self) -> Vec<T> {
        [&self.w1, &self.b1, &self.w2, &self.b2]
            .into_iter()
            .flat_map(|v| v.iter().copied())
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[T]) {
        assert_eq!(params.len(), self.parameter_count());
        let mut rest = params;
        for v in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            let (head, tail) = rest.split_at(v.len());
            v.copy_from_slice(head);
            rest = tail;
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    /// Gradient of [`ClassifierModel::loss`] with respect to
    /// [`ClassifierModel::parameters`].
    pub fn loss_gradient(&self, features: &[Vec<T>], labels: &[usize]) -> Vec<T> {
        let mut grad = Gradient::zeros(self);
        let mut s = self.scratch();
        for (f, &y) in features.iter().zip(labels) {
            self.accumulate(f, y, None, &mut s, &mut grad);
        }
        let n = T::of_usize(features.len().max(1));
        grad.flatten().into_iter().map(|g| g / n).collect()
    }

    /// Adds one example's gradient to `grad` and returns its loss.
    fn accumulate(
        &self,
        input: &[T],
        label: usize,
        mask: Option<&[T]>,
        s: &mut Scratch<T>,
        grad: &mut Gradient<T>,
    ) -> T {
        self.forward(input, mask, s);
        let loss = cross_entropy(&s.logits, label);
        softmax_in_place(&mut s.logits);
        s.logits[label] = s.logits[label] - T::one();
        let d_logits = &s.logits;

        let width = self.width();
        let act = if self.hidden_size > 0 { &s.hidden } else { &s.x };
        for (c, &dl) in d_logits.iter().enumerate() {
            grad.b2[c] = grad.b2[c] + dl;
            for (g, &a) in grad.w2[c * width..(c + 1) * width].iter_mut().zip(act) {
                *g = *g + dl * a;
            }
        }
        if self.hidden_size > 0 {
            for (h, dh) in s.d_hidden.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (c, &dl) in d_logits.iter().enumerate() {
                    acc = acc + self.w2[c * width + h] * dl;
                }
                // s.hidden holds tanh(pre)·m; the derivative through the
                // mask is m·(1 − tanh²).
                let (m, t) = match mask {
                    Some(m) if m[h] == T::zero() => (T::zero(), T::zero()),
                    Some(m) => (m[h], s.hidden[h] / m[h]),
                    None => (T::one(), s.hidden[h]),
                };
                *dh = acc * m * (T::one() - t * t);
            }
            for (h, &dh) in s.d_hidden.iter().enumerate() {
                grad.b1[h] = grad.b1[h] + dh;
                let row = &mut grad.w1[h * self.input_dim..(h + 1) * self.input_dim];
                for (g, &x) in row.iter_mut().zip(&s.x) {
                    *g = *g + dh * x;
                }
            }
        }
        loss
    }

    fn sgd_step(&mut self, grad: &Gradient<T>, step: T) {
        for (p, g) in [
            (&mut self.w1, &grad.w1),
            (&mut self.b1, &grad.b1),
            (&mut self.w2, &grad.w2),
            (&mut self.b2, &grad.b2),
        ] {
            for (w, &d) in p.iter_mut().zip(g) {
                *w = *w - step * d;
            }
        }
    }

    fn all_finite(&self) -> bool {
        [&self.w1, &self.b1, &self.w2, &self.b2]
            .into_iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

struct Gradient<T> {
    w1: Vec<T>,
    b1: Vec<T>,
    w2: Vec<T>,
    b2: Vec<T>,
}

impl<T: Scalar> Gradient<T> {
    fn zeros(m: &ClassifierModel<T>) -> Self {
        Self {
            w1: vec![T::zero(); m.w1.len()],
            b1: vec![T::zero(); m.b1.len()],
            w2: vec![T::zero(); m.w2.len()],
            b2: vec![T::zero(); m.b2.len()],
        }
    }

    fn clear(&mut self) {
        for v in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            v.fill(T::zero());
        }
    }

    fn flatten(self) -> Vec<T> {
        [self.w1, self.b1, self.w2, self.b2].concat()
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn log_sum_exp<T: Scalar>(v: &[T]) -> T {
    let max = v.iter().copied().fold(T::neg_infinity(), T::max);
    max + v.iter().map(|&x| (x - max).exp()).sum::<T>().ln()
}

fn cross_entropy<T: Scalar>(logits: &[T], label: usize) -> T {
    log_sum_exp(logits) - logits[label]
}

fn softmax_in_place<T: Scalar>(v: &mut [T]) {
    let lse = log_sum_exp(v);
    for x in v.iter_mut() {
        *x = (*x - lse).exp();
    }
}

fn check_training_set<T: Scalar>(
    features: &[Vec<T>],
    labels: &[usize],
) -> Result<(usize, usize), ProbeError> {
    if features.is_empty() {
        return Err(ProbeError::EmptyTrainingSet);
    }
    if features.len() != labels.len() {
        return Err(ProbeError::LabelCount {
            features: features.len(),
            labels: labels.len(),
        });
    }
    let dim = features[0].len();
    if dim == 0 {
        return Err(ProbeError::DimMismatch { expected: 1, found: 0 });
    }
    if let Some(f) = features.iter().find(|f| f.len() != dim) {
        return Err(ProbeError::DimMismatch {
            expected: dim,
            found: f.len(),
        });
    }
    if features.iter().any(|f| f.iter().any(|x| !x.is_finite())) {
        return Err(ProbeError::NonFinite);
    }
    let label_count = labels.iter().max().copied().unwrap_or(0) + 1;
    Ok((dim, label_count))
}

/// Fit a classifier to `features`/`labels` with mini-batch SGD.
///
/// Deterministic for a given config (the seed drives initialization, batch
/// order and dropout masks).
pub fn train<T: Scalar>(
    config: &ClassifierConfig,
    features: &[Vec<T>],
    labels: &[usize],
) -> Result<ClassifierModel<T>, ProbeError> {
    let mut model = ClassifierModel::initial(config, features, labels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut grad = Gradient::zeros(&model);
    let mut s = model.scratch();
    let keep = 1.0 - config.dropout;
    let use_dropout = config.hidden_size > 0 && config.dropout > 0.0;
    let mut mask = vec![T::one(); config.hidden_size];
    let inv_keep = T::of(1.0 / keep);
    let lr = T::of(config.learning_rate);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            grad.clear();
            for &i in batch {
                let m = if use_dropout {
                    for m in mask.iter_mut() {
                        *m = if rng.random_bool(keep) { inv_keep } else { T::zero() };
                    }
                    Some(mask.as_slice())
                } else {
                    None
                };
                model.accumulate(&features[i], labels[i], m, &mut s, &mut grad);
            }
            model.sgd_step(&grad, lr / T::of_usize(batch.len()));
            if !model.all_finite() {
                return Err(ProbeError::Diverged);
            }
        }
    }
    model.trained = true;
    Ok(model)
}

/// Fraction of examples whose argmax prediction equals the label.
pub fn evaluate<T: Scalar>(
    model: &ClassifierModel<T>,
    features: &[Vec<T>],
    labels: &[usize],
) -> Result<f64, ProbeError> {
    if features.is_empty() {
        return Err(ProbeError::EmptyEvaluationSet);
    }
    if features.len() != labels.len() {
        return Err(ProbeError::LabelCount {
            features: features.len(),
            labels: labels.len(),
        });
    }
    if let Some(f) = features.iter().find(|f| f.len() != model.input_dim) {
        return Err(ProbeError::DimMismatch {
            expected: model.input_dim,
            found: f.len(),
        });
    }
    let correct = features
        .iter()
        .zip(labels)
        .filter(|(f, &y)| model.predict(f) == y)
        .count();
    Ok(correct as f64 / features.len() as f64)
}
