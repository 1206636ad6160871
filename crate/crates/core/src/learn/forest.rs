//! Bagged random forest over the CART trees.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::featurize::{FeatureSchema, FeatureVector, WindowSpec};
use crate::sensor_data::ActivityLabel;

use super::cv::{Learner, Predictor};
use super::tree::{grow_tree, DecisionTree};
use super::{Example, ForestParams, LearnError, Table};

/// Provenance recorded with a trained forest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainMeta {
    /// Hex prefix of a SHA-256 over the training table (values + labels).
    pub dataset_fingerprint: String,
    pub n_train_windows: usize,
    /// Identifies this trained model on the wire.
    pub model_version: String,
}

/// An immutable trained ensemble. Prediction depends only on the stored
/// trees and the input.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomForestModel {
    pub trees: Vec<DecisionTree>,
    pub classes: [ActivityLabel; ActivityLabel::COUNT],
    pub feature_schema: FeatureSchema,
    /// Windowing the features were computed with; inference validates
    /// incoming windows against it.
    pub window: WindowSpec,
    pub params: ForestParams,
    pub train_meta: TrainMeta,
}

impl RandomForestModel {
    /// Majority vote over the trees; ties resolve to the earliest
    /// [`ActivityLabel`]. Confidence is the winning vote fraction.
    pub fn predict(&self, x: &FeatureVector) -> Result<(ActivityLabel, f64), LearnError> {
        if x.len() != self.feature_schema.len() {
            return Err(LearnError::SchemaMismatch {
                expected: self.feature_schema.len(),
                got: x.len(),
            });
        }
        let mut votes = [0usize; ActivityLabel::COUNT];
        for tree in &self.trees {
            votes[tree.predict(&x.values).index()] += 1;
        }
        let mut best = 0;
        for (i, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = i;
            }
        }
        let label = ActivityLabel::from_index(best).unwrap();
        Ok((label, votes[best] as f64 / self.trees.len() as f64))
    }

    pub fn model_version(&self) -> &str {
        &self.train_meta.model_version
    }

    pub fn with_window_spec(mut self, window: WindowSpec) -> Self {
        self.window = window;
        self
    }
}

impl Predictor for RandomForestModel {
    fn predict_label(&self, x: &FeatureVector) -> ActivityLabel {
        self.predict(x).expect("harness validates feature length").0
    }
}

impl Learner for ForestParams {
    fn name(&self) -> String {
        "random_forest".into()
    }

    /// Fits under the CV harness with a placeholder schema sized from the
    /// data; the harness only needs labels back.
    fn fit(&self, data: &[Example], seed: u64) -> Result<Box<dyn Predictor>, LearnError> {
        let n_features = data.first().map_or(0, |(fv, _)| fv.len());
        let schema = FeatureSchema {
            names: (0..n_features).map(|i| format!("f{i}")).collect(),
        };
        let params = ForestParams { seed, ..*self };
        Ok(Box::new(train_forest(data, &params, &schema)?))
    }
}

/// SHA-256 fingerprint (first 16 hex chars) of a training table: row/column
/// counts, little-endian feature bytes, and label indices.
pub fn dataset_fingerprint(data: &[Example]) -> String {
    let mut hasher = Sha256::new();
    hasher.update((data.len() as u64).to_le_bytes());
    let n_features = data.first().map_or(0, |(fv, _)| fv.len());
    hasher.update((n_features as u64).to_le_bytes());
    for (fv, label) in data {
        for v in &fv.values {
            hasher.update(v.to_le_bytes());
        }
        hasher.update([label.index() as u8]);
    }
    hex::encode(&hasher.finalize()[..8])
}

fn derive_model_version(params: &ForestParams, fingerprint: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(params).expect("params serialize"));
    hasher.update(fingerprint.as_bytes());
    format!("rf1-{}", hex::encode(&hasher.finalize()[..6]))
}

/// Trains `n_trees` trees, each on a bootstrap resample (size = |data|,
/// with replacement) when `bootstrap` is set, else on the full data.
///
/// Per-tree seeds are drawn upfront from ChaCha8(params.seed), so the
/// result is a pure function of (data, params) regardless of evaluation
/// order.
pub fn train_forest(
    data: &[Example],
    params: &ForestParams,
    schema: &FeatureSchema,
) -> Result<RandomForestModel, LearnError> {
    if params.n_trees == 0 {
        return Err(LearnError::InvalidParams("n_trees must be >= 1".into()));
    }
    let table = Table::from_examples(data)?;
    if table.n_features != schema.len() {
        return Err(LearnError::SchemaMismatch {
            expected: schema.len(),
            got: table.n_features,
        });
    }
    params.tree.check(table.n_features)?;

    let mut seeder = ChaCha8Rng::seed_from_u64(params.seed);
    let tree_seeds: Vec<u64> = (0..params.n_trees).map(|_| seeder.next_u64()).collect();

    let n = table.n_rows();
    let trees = tree_seeds
        .into_iter()
        .map(|tree_seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
            let indices: Vec<u32> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n) as u32).collect()
            } else {
                (0..n as u32).collect()
            };
            grow_tree(&table, indices, &params.tree, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let fingerprint = dataset_fingerprint(data);
    let model_version = derive_model_version(params, &fingerprint);
    Ok(RandomForestModel {
        trees,
        classes: ActivityLabel::ALL,
        feature_schema: schema.clone(),
        window: WindowSpec::default(),
        params: *params,
        train_meta: TrainMeta {
            dataset_fingerprint: fingerprint,
            n_train_windows: data.len(),
            model_version,
        },
    })
}
