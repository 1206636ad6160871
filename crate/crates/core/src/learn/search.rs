//! Randomized hyperparameter search scored by cross-validation.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{cross_validate, Example, ForestParams, LearnError, TreeParams};

/// Candidate values per forest hyperparameter. A `None` depth means
/// unlimited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<Option<usize>>,
    pub min_samples_split: Vec<usize>,
    pub max_features: Vec<usize>,
    /// Number of distinct configurations to score.
    pub n_iters: usize,
}

impl SearchSpace {
    /// Default space around the stock forest configuration; it contains
    /// [`ForestParams::default_for`] for any schema whose sqrt rounds to 7.
    pub fn default_for(n_features: usize) -> Self {
        let auto = (n_features as f64).sqrt().ceil() as usize;
        let mut max_features = vec![auto.saturating_sub(2).max(1), auto];
        max_features.push((auto + 3).min(n_features));
        max_features.dedup();
        Self {
            n_trees: vec![50, 100, 150],
            max_depth: vec![None, Some(12)],
            min_samples_split: vec![2, 4],
            max_features,
            n_iters: 12,
        }
    }

    /// Number of distinct configurations in the space.
    pub fn size(&self) -> usize {
        self.n_trees.len()
            * self.max_depth.len()
            * self.min_samples_split.len()
            * self.max_features.len()
    }

    fn is_degenerate(&self) -> bool {
        self.n_trees.is_empty()
            || self.max_depth.is_empty()
            || self.min_samples_split.is_empty()
            || self.max_features.is_empty()
            || self.n_iters == 0
    }

    fn config(&self, key: (usize, usize, usize, usize), seed: u64) -> ForestParams {
        ForestParams {
            n_trees: self.n_trees[key.0],
            tree: TreeParams {
                max_depth: self.max_depth[key.1],
                min_samples_split: self.min_samples_split[key.2],
                max_features: self.max_features[key.3],
            },
            bootstrap: true,
            seed,
        }
    }
}

/// One scored configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub params: ForestParams,
    pub mean_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_params: ForestParams,
    pub best_mean_f1: f64,
    pub trials: Vec<Trial>,
}

/// Samples `n_iters` distinct configurations uniformly from the space
/// (exhausting it when `n_iters >= size`), scores each with k-fold CV under
/// one shared fold assignment, and returns the argmax mean F1. Ties keep
/// the first-sampled configuration.
pub fn randomized_search(
    data: &[Example],
    space: &SearchSpace,
    k: usize,
    seed: u64,
) -> Result<SearchResult, LearnError> {
    if space.is_degenerate() {
        return Err(LearnError::EmptySpace);
    }

    let keys = sample_keys(space, seed);
    let mut trials = Vec::with_capacity(keys.len());
    for key in keys {
        // the same model seed and cv seed for every trial: identical folds,
        // comparable scores
        let params = space.config(key, seed);
        let report = cross_validate(data, &params, k, seed)?;
        trials.push(Trial {
            params,
            mean_f1: report.mean_f1,
        });
    }

    let mut best = 0;
    for (i, trial) in trials.iter().enumerate() {
        if trial.mean_f1 > trials[best].mean_f1 {
            best = i;
        }
    }
    Ok(SearchResult {
        best_params: trials[best].params,
        best_mean_f1: trials[best].mean_f1,
        trials,
    })
}

fn sample_keys(space: &SearchSpace, seed: u64) -> Vec<(usize, usize, usize, usize)> {
    let size = space.size();
    if space.n_iters >= size {
        // exhaustive, in nested-loop order
        let mut keys = Vec::with_capacity(size);
        for a in 0..space.n_trees.len() {
            for b in 0..space.max_depth.len() {
                for c in 0..space.min_samples_split.len() {
                    for d in 0..space.max_features.len() {
                        keys.push((a, b, c, d));
                    }
                }
            }
        }
        return keys;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut keys = Vec::with_capacity(space.n_iters);
    while keys.len() < space.n_iters {
        let key = (
            rng.random_range(0..space.n_trees.len()),
            rng.random_range(0..space.max_depth.len()),
            rng.random_range(0..space.min_samples_split.len()),
            rng.random_range(0..space.max_features.len()),
        );
        if seen.insert(key) {
            keys.push(key);
        }
    }
    keys
}
