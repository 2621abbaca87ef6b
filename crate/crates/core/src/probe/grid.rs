use std::cmp::Ordering;

use rayon::prelude::*;

use super::classifier::{evaluate, train, ClassifierConfig};
use super::dataset::{ProbingDataset, Split};
use super::ProbeError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub config: ClassifierConfig,
    pub dev_accuracy: f64,
    pub test_accuracy: f64,
}

/// Train every config on the train split, keep the one with the best dev
/// accuracy (ties: smaller hidden size, then lower dropout, then earlier in
/// `configs`) and report its test accuracy. Test accuracy of the other
/// configs is never computed.
pub fn grid_search<T: Scalar>(
    configs: &[ClassifierConfig],
    dataset: &ProbingDataset,
    features: &[Vec<T>],
) -> Result<GridOutcome, ProbeError> {
    if configs.is_empty() {
        return Err(ProbeError::EmptyGrid);
    }
    if features.len() != dataset.len() {
        return Err(ProbeError::LabelCount {
            features: features.len(),
            labels: dataset.len(),
        });
    }
    let subset = |split: Split| -> (Vec<Vec<T>>, Vec<usize>) {
        dataset
            .indices(split)
            .into_iter()
            .map(|i| (features[i].clone(), dataset.examples[i].label))
            .unzip()
    };
    let (train_x, train_y) = subset(Split::Train);
    let (dev_x, dev_y) = subset(Split::Dev);
    let (test_x, test_y) = subset(Split::Test);
    if dev_x.is_empty() {
        return Err(ProbeError::EmptySplit("dev"));
    }
    if test_x.is_empty() {
        return Err(ProbeError::EmptySplit("test"));
    }

    let scored = configs
        .par_iter()
        .map(|cfg| {
            let model = train(cfg, &train_x, &train_y)?;
            let dev = evaluate(&model, &dev_x, &dev_y)?;
            Ok((cfg, model, dev))
        })
        .collect::<Result<Vec<_>, ProbeError>>()?;

    let mut best = 0;
    for (i, cand) in scored.iter().enumerate().skip(1) {
        if prefer(cand.0, cand.2, scored[best].0, scored[best].2) {
            best = i;
        }
    }
    let (config, model, dev_accuracy) = &scored[best];
    Ok(GridOutcome {
        config: **config,
        dev_accuracy: *dev_accuracy,
        test_accuracy: evaluate(model, &test_x, &test_y)?,
    })
}

fn prefer(a: &ClassifierConfig, a_dev: f64, b: &ClassifierConfig, b_dev: f64) -> bool {
    let order = a_dev
        .partial_cmp(&b_dev)
        .unwrap_or(Ordering::Equal)
        .then(b.hidden_size.cmp(&a.hidden_size))
        .then(b.dropout.partial_cmp(&a.dropout).unwrap_or(Ordering::Equal));
    order == Ordering::Greater
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::dataset::LabeledSentence;

    fn toy() -> (ProbingDataset, Vec<Vec<f64>>) {
        let mut examples = Vec::new();
        let mut feats = Vec::new();
        for i in 0..100 {
            let label = i % 2;
            let split = Split::for_position(i, 100);
            examples.push(LabeledSentence { split, label, tokens: vec![] });
            let x = if label == 0 { -1.0 } else { 1.0 };
            feats.push(vec![x + 0.01 * (i as f64 % 7.0), 0.3]);
        }
        (ProbingDataset { task: None, examples, label_count: 2 }, feats)
    }

    #[test]
    fn single_config_is_selected() {
        let (ds, x) = toy();
        let cfg = ClassifierConfig { hidden_size: 50, epochs: 5, ..Default::default() };
        let out = grid_search(&[cfg], &ds, &x).unwrap();
        assert_eq!(out.config, cfg);
    }

    #[test]
    fn ties_prefer_smaller_models() {
        let (ds, x) = toy();
        let base = ClassifierConfig { epochs: 20, ..Default::default() };
        let grid = base.grid(&[100, 0, 50], &[0.2, 0.0]);
        let out = grid_search(&grid, &ds, &x).unwrap();
        // Every config separates the toy data perfectly.
        assert_eq!(out.dev_accuracy, 1.0);
        assert_eq!((out.config.hidden_size, out.config.dropout), (0, 0.0));
    }

    #[test]
    fn selection_ignores_test_split() {
        let (mut ds, x) = toy();
        let base = ClassifierConfig { epochs: 20, ..Default::default() };
        let grid = base.grid(&[0, 50], &[0.0, 0.1]);
        let before = grid_search(&grid, &ds, &x).unwrap();
        for e in ds.examples.iter_mut().filter(|e| e.split == Split::Test) {
            e.label = 1 - e.label;
        }
        let after = grid_search(&grid, &ds, &x).unwrap();
        assert_eq!(before.config, after.config);
        assert_eq!(before.dev_accuracy, after.dev_accuracy);
        assert!((before.test_accuracy + after.test_accuracy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_grid() {
        let (ds, x) = toy();
        assert!(matches!(grid_search(&[], &ds, &x), Err(ProbeError::EmptyGrid)));
    }
}
