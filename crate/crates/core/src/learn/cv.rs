//! Stratified k-fold cross-validation over any learner.

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::featurize::FeatureVector;
use crate::sensor_data::ActivityLabel;

use super::metrics::{compute_metrics, MetricsReport};
use super::{Example, LearnError};

/// A fitted model able to label feature vectors. Inputs are validated by
/// the harness, so prediction itself is total.
pub trait Predictor {
    fn predict_label(&self, x: &FeatureVector) -> ActivityLabel;
}

/// Anything trainable under the CV harness.
pub trait Learner {
    fn name(&self) -> String;
    fn fit(&self, data: &[Example], seed: u64) -> Result<Box<dyn Predictor>, LearnError>;
}

/// Outcome of one k-fold run.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub k: usize,
    pub per_fold: Vec<MetricsReport>,
    /// Mean of the per-fold macro F1 scores.
    pub mean_f1: f64,
    /// Window index -> fold id holding it out.
    pub fold_assignment: Vec<usize>,
    /// Metrics over all held-out predictions pooled together (each window
    /// is predicted exactly once).
    pub pooled: MetricsReport,
}

/// Runs stratified k-fold CV: per-class counts differ by at most one across
/// folds, and so do total fold sizes. Fully deterministic given
/// (data, k, seed); per-fold training seeds derive from `seed`.
pub fn cross_validate(
    data: &[Example],
    learner: &dyn Learner,
    k: usize,
    seed: u64,
) -> Result<CvReport, LearnError> {
    if k < 2 {
        return Err(LearnError::InvalidK { k });
    }
    if data.len() < k {
        return Err(LearnError::TooFewSamples { n: data.len(), k });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fold_assignment = assign_folds(data, k, &mut rng);
    let fold_seeds: Vec<u64> = (0..k).map(|_| rng.next_u64()).collect();

    let mut per_fold = Vec::with_capacity(k);
    let mut pooled_pairs = Vec::with_capacity(data.len());
    for (fold, &fold_seed) in fold_seeds.iter().enumerate() {
        let mut train = Vec::with_capacity(data.len());
        let mut test = Vec::new();
        for (i, example) in data.iter().enumerate() {
            if fold_assignment[i] == fold {
                test.push(example);
            } else {
                train.push(example.clone());
            }
        }
        let model = learner.fit(&train, fold_seed)?;
        let pairs: Vec<(ActivityLabel, ActivityLabel)> = test
            .iter()
            .map(|(x, y)| (*y, model.predict_label(x)))
            .collect();
        pooled_pairs.extend_from_slice(&pairs);
        per_fold.push(compute_metrics(&pairs)?);
    }

    let mean_f1 = per_fold.iter().map(|m| m.macro_avg.f1).sum::<f64>() / k as f64;
    let pooled = compute_metrics(&pooled_pairs)?;
    Ok(CvReport {
        k,
        per_fold,
        mean_f1,
        fold_assignment,
        pooled,
    })
}

/// Shuffles each class's indices, then deals them round-robin with a cursor
/// shared across classes. The shared cursor keeps both per-class counts and
/// total fold sizes within one of each other.
fn assign_folds(data: &[Example], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut assignment = vec![0usize; data.len()];
    let mut cursor = 0usize;
    for class in ActivityLabel::ALL {
        let mut indices: Vec<usize> = data
            .iter()
            .enumerate()
            .filter(|(_, (_, y))| *y == class)
            .map(|(i, _)| i)
            .collect();
        indices.shuffle(rng);
        for i in indices {
            assignment[i] = cursor % k;
            cursor += 1;
        }
    }
    assignment
}
