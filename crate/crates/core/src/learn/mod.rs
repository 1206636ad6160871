//! From-scratch decision trees, random forest, baseline models,
//! classification metrics, stratified k-fold cross-validation, and
//! randomized hyperparameter search.
//!
//! Everything here is deterministic: any operation taking a seed is a pure
//! function of its inputs and that seed, and trained models are immutable.

mod baselines;
mod cv;
mod forest;
mod metrics;
mod model_io;
mod search;
mod tree;

pub use baselines::{train_baselines, BaselineScore, GbtParams, KnnParams};
pub use cv::{cross_validate, CvReport, Learner, Predictor};
pub use forest::{dataset_fingerprint, train_forest, RandomForestModel, TrainMeta};
pub use metrics::{compute_metrics, AverageMetrics, ClassMetrics, MetricsReport};
pub use model_io::{load_model, save_model, ModelIoError, MODEL_FORMAT_VERSION};
pub use search::{randomized_search, SearchResult, SearchSpace, Trial};
pub use tree::{train_tree, DecisionTree};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurize::FeatureVector;
use crate::sensor_data::ActivityLabel;

/// A labeled training example: one window's features and its class.
pub type Example = (FeatureVector, ActivityLabel);

/// Parameters for a single CART-style classification tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Maximum split depth; `None` grows until nodes are pure or too small.
    pub max_depth: Option<usize>,
    /// Nodes with fewer samples become leaves. Must be >= 2.
    pub min_samples_split: usize,
    /// Number of candidate features sampled at each split, in
    /// [1, n_features]. Splits minimize weighted Gini impurity.
    pub max_features: usize,
}

impl TreeParams {
    /// Conventional defaults: unlimited depth, min split 2, and
    /// ceil(sqrt(n_features)) candidate features per split.
    pub fn default_for(n_features: usize) -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            max_features: (n_features as f64).sqrt().ceil() as usize,
        }
    }

    /// Variant considering every feature at every split, as a standalone
    /// tree (rather than a forest member) conventionally does.
    pub fn full_view(n_features: usize) -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            max_features: n_features,
        }
    }

    pub(crate) fn check(&self, n_features: usize) -> Result<(), LearnError> {
        if self.min_samples_split < 2 {
            return Err(LearnError::InvalidParams(format!(
                "min_samples_split must be >= 2 (got {})",
                self.min_samples_split
            )));
        }
        if self.max_features == 0 || self.max_features > n_features {
            return Err(LearnError::InvalidParams(format!(
                "max_features must be in 1..={n_features} (got {})",
                self.max_features
            )));
        }
        if let Some(d) = self.max_depth {
            if d == 0 {
                return Err(LearnError::InvalidParams(
                    "max_depth must be positive when set".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Parameters for the bagged forest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    /// Train each tree on a size-n resample drawn with replacement.
    pub bootstrap: bool,
    pub seed: u64,
}

impl ForestParams {
    pub fn default_for(n_features: usize) -> Self {
        Self {
            n_trees: 100,
            tree: TreeParams::default_for(n_features),
            bootstrap: true,
            seed: 42,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error("training data is empty")]
    EmptyData,
    #[error("metric input is empty")]
    EmptyInput,
    #[error("feature length mismatch: expected {expected}, got {got}")]
    SchemaMismatch { expected: usize, got: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("k must be >= 2 (got {k})")]
    InvalidK { k: usize },
    #[error("need at least k={k} samples, got {n}")]
    TooFewSamples { n: usize, k: usize },
    #[error("hyperparameter search space is empty")]
    EmptySpace,
    #[error("training requires at least 2 distinct classes")]
    DegenerateClasses,
}

/// Dense row-major view of the training examples, used by all learners.
pub(crate) struct Table {
    pub n_features: usize,
    pub values: Vec<f64>,
    pub labels: Vec<u8>,
}

impl Table {
    pub fn from_examples(data: &[Example]) -> Result<Self, LearnError> {
        let first = data.first().ok_or(LearnError::EmptyData)?;
        let n_features = first.0.len();
        let mut values = Vec::with_capacity(data.len() * n_features);
        let mut labels = Vec::with_capacity(data.len());
        for (fv, label) in data {
            if fv.len() != n_features {
                return Err(LearnError::SchemaMismatch {
                    expected: n_features,
                    got: fv.len(),
                });
            }
            values.extend_from_slice(&fv.values);
            labels.push(label.index() as u8);
        }
        Ok(Self {
            n_features,
            values,
            labels,
        })
    }

    #[inline]
    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.values[row * self.n_features + feature]
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }
}
