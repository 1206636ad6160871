//! Baseline classifiers and the model-comparison harness.
//!
//! The roster deliberately stays small: a single full-view decision tree,
//! the random forest, 5-nearest-neighbors, and a minimal one-vs-rest
//! gradient-boosted-trees model with shallow regression trees.

use serde::{Deserialize, Serialize};

use crate::featurize::FeatureVector;
use crate::sensor_data::ActivityLabel;

use super::cv::{cross_validate, Learner, Predictor};
use super::{Example, ForestParams, LearnError, Table, TreeParams};

const N_CLASSES: usize = ActivityLabel::COUNT;

/// k-nearest-neighbors with Euclidean distance on z-scored features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 5 }
    }
}

struct KnnModel {
    k: usize,
    rows: Vec<Vec<f64>>,
    labels: Vec<ActivityLabel>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl KnnModel {
    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(self.stds.iter()))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

impl Predictor for KnnModel {
    fn predict_label(&self, x: &FeatureVector) -> ActivityLabel {
        let q = self.normalize(&x.values);
        let mut dists: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let d: f64 = row.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        // total order on (distance, index) keeps neighbor choice deterministic
        dists.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = [0usize; N_CLASSES];
        for (_, i) in dists.iter().take(self.k.min(dists.len())) {
            votes[self.labels[*i].index()] += 1;
        }
        let mut best = 0;
        for (i, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = i;
            }
        }
        ActivityLabel::from_index(best).unwrap()
    }
}

impl Learner for KnnParams {
    fn name(&self) -> String {
        format!("knn_k{}", self.k)
    }

    fn fit(&self, data: &[Example], _seed: u64) -> Result<Box<dyn Predictor>, LearnError> {
        if self.k == 0 {
            return Err(LearnError::InvalidParams("knn k must be >= 1".into()));
        }
        let table = Table::from_examples(data)?;
        let n = table.n_rows() as f64;
        let mut means = vec![0.0; table.n_features];
        let mut stds = vec![0.0; table.n_features];
        for f in 0..table.n_features {
            let mean = (0..table.n_rows()).map(|r| table.value(r, f)).sum::<f64>() / n;
            let var = (0..table.n_rows())
                .map(|r| (table.value(r, f) - mean).powi(2))
                .sum::<f64>()
                / n;
            means[f] = mean;
            // constant features normalize to zero rather than dividing by zero
            stds[f] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        let rows: Vec<Vec<f64>> = data
            .iter()
            .map(|(fv, _)| {
                fv.values
                    .iter()
                    .zip(means.iter().zip(stds.iter()))
                    .map(|(v, (m, s))| (v - m) / s)
                    .collect()
            })
            .collect();
        Ok(Box::new(KnnModel {
            k: self.k,
            rows,
            labels: data.iter().map(|(_, y)| *y).collect(),
            means,
            stds,
        }))
    }
}

/// One-vs-rest gradient boosting with shallow squared-error regression
/// trees on logistic residuals. A stand-in comparison point, not a tuned
/// booster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            n_rounds: 30,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_split: 4,
        }
    }
}

enum RegNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

struct RegressionTree {
    nodes: Vec<RegNode>,
    root: usize,
}

impl RegressionTree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut at = self.root;
        loop {
            match &self.nodes[at] {
                RegNode::Leaf { value } => return *value,
                RegNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Greedy variance-reduction fit; considers every feature at every
    /// node, so it is deterministic without an rng.
    fn fit(table: &Table, targets: &[f64], params: &GbtParams) -> Self {
        let mut tree = RegressionTree {
            nodes: Vec::new(),
            root: 0,
        };
        let indices: Vec<u32> = (0..table.n_rows() as u32).collect();
        tree.root = tree.grow(table, targets, indices, 0, params);
        tree
    }

    fn grow(
        &mut self,
        table: &Table,
        targets: &[f64],
        indices: Vec<u32>,
        depth: usize,
        params: &GbtParams,
    ) -> usize {
        let n = indices.len();
        let sum: f64 = indices.iter().map(|&i| targets[i as usize]).sum();
        let mean = sum / n as f64;
        if depth >= params.max_depth || n < params.min_samples_split {
            return self.push_leaf(mean);
        }

        let mut best: Option<(f64, usize, f64)> = None; // (sse, feature, threshold)
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
        for feature in 0..table.n_features {
            pairs.clear();
            pairs.extend(
                indices
                    .iter()
                    .map(|&i| (table.value(i as usize, feature), targets[i as usize])),
            );
            pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let total: f64 = sum;
            let mut left_sum = 0.0;
            for i in 0..n - 1 {
                left_sum += pairs[i].1;
                let (a, b) = (pairs[i].0, pairs[i + 1].0);
                if a < b {
                    let nl = (i + 1) as f64;
                    let nr = (n - i - 1) as f64;
                    let right_sum = total - left_sum;
                    // minimizing SSE == maximizing sum^2/n on both sides
                    let score = -(left_sum * left_sum / nl + right_sum * right_sum / nr);
                    if best.is_none_or(|(s, _, _)| score < s) {
                        let mid = a + (b - a) / 2.0;
                        let threshold = if mid < b { mid } else { a };
                        best = Some((score, feature, threshold));
                    }
                }
            }
        }

        match best {
            None => self.push_leaf(mean),
            Some((_, feature, threshold)) => {
                let (left_idx, right_idx): (Vec<u32>, Vec<u32>) = indices
                    .into_iter()
                    .partition(|&i| table.value(i as usize, feature) <= threshold);
                let left = self.grow(table, targets, left_idx, depth + 1, params);
                let right = self.grow(table, targets, right_idx, depth + 1, params);
                self.nodes.push(RegNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                });
                self.nodes.len() - 1
            }
        }
    }

    fn push_leaf(&mut self, value: f64) -> usize {
        self.nodes.push(RegNode::Leaf { value });
        self.nodes.len() - 1
    }
}

struct GbtModel {
    // per class: boosted stages added to a zero initial score
    stages: Vec<Vec<RegressionTree>>,
    learning_rate: f64,
}

impl Predictor for GbtModel {
    fn predict_label(&self, x: &FeatureVector) -> ActivityLabel {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (c, trees) in self.stages.iter().enumerate() {
            let score: f64 = trees.iter().map(|t| t.predict(&x.values)).sum::<f64>()
                * self.learning_rate;
            if score > best_score {
                best_score = score;
                best = c;
            }
        }
        ActivityLabel::from_index(best).unwrap()
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Learner for GbtParams {
    fn name(&self) -> String {
        "gradient_boosted_trees".into()
    }

    fn fit(&self, data: &[Example], _seed: u64) -> Result<Box<dyn Predictor>, LearnError> {
        if self.n_rounds == 0 || self.learning_rate <= 0.0 || self.max_depth == 0 {
            return Err(LearnError::InvalidParams(
                "gbt needs n_rounds >= 1, learning_rate > 0, max_depth >= 1".into(),
            ));
        }
        let table = Table::from_examples(data)?;
        let n = table.n_rows();
        let mut stages = Vec::with_capacity(N_CLASSES);
        for class in 0..N_CLASSES {
            let y: Vec<f64> = (0..n)
                .map(|r| if table.labels[r] as usize == class { 1.0 } else { 0.0 })
                .collect();
            let mut scores = vec![0.0f64; n];
            let mut trees = Vec::with_capacity(self.n_rounds);
            for _ in 0..self.n_rounds {
                let residuals: Vec<f64> = (0..n)
                    .map(|r| y[r] - sigmoid(scores[r] * self.learning_rate))
                    .collect();
                let tree = RegressionTree::fit(&table, &residuals, self);
                for (r, score) in scores.iter_mut().enumerate() {
                    *score += tree.predict(
                        &table.values[r * table.n_features..(r + 1) * table.n_features],
                    );
                }
                trees.push(tree);
            }
            stages.push(trees);
        }
        Ok(Box::new(GbtModel {
            stages,
            learning_rate: self.learning_rate,
        }))
    }
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineScore {
    pub model: String,
    pub mean_f1: f64,
}

/// Cross-validates the full baseline roster under one shared fold
/// assignment and returns mean F1 per model, sorted descending.
///
/// Requires at least two distinct classes; one-vs-rest boosting and the
/// comparison itself are meaningless below that.
pub fn train_baselines(
    data: &[Example],
    k: usize,
    seed: u64,
) -> Result<Vec<BaselineScore>, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyData);
    }
    let mut present = [false; N_CLASSES];
    for (_, y) in data {
        present[y.index()] = true;
    }
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(LearnError::DegenerateClasses);
    }

    let n_features = data[0].0.len();
    let learners: Vec<Box<dyn Learner>> = vec![
        Box::new(TreeParams::full_view(n_features)),
        Box::new(ForestParams::default_for(n_features)),
        Box::new(KnnParams::default()),
        Box::new(GbtParams::default()),
    ];

    let mut scores = Vec::with_capacity(learners.len());
    for learner in &learners {
        let report = cross_validate(data, learner.as_ref(), k, seed)?;
        scores.push(BaselineScore {
            model: learner.name(),
            mean_f1: report.mean_f1,
        });
    }
    scores.sort_by(|a, b| b.mean_f1.total_cmp(&a.mean_f1).then(a.model.cmp(&b.model)));
    Ok(scores)
}
